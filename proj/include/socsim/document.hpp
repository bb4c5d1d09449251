#pragma once

// Structured-document plumbing shared by configs, scenarios and studies.
// Documents are authored as YAML, held in memory as JSON trees, and
// canonicalized as sorted-key compact JSON for digesting.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "socsim/common.hpp"

namespace socsim {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

struct SourcePos {
  int line = 0;    // 1-based, 0 = unknown
  int column = 0;  // 1-based
};

/// A parsed YAML document plus the source position of every node, keyed by
/// JSON pointer ("" for the root, "/simulation/seed", "/agents/0/id").
struct Document {
  OrderedJson tree;
  std::map<std::string, SourcePos> positions;

  SourcePos position_of(const std::string& pointer) const;
};

/// Throws ConfigError with line/column on malformed YAML.
Document parse_yaml(std::string_view text);
Document load_yaml_file(const std::string& path);

/// Block-style YAML preserving the key order of the tree.
std::string to_yaml(const OrderedJson& tree);

/// Sorted-key compact JSON; the byte form that digests are computed over.
std::string canonical_bytes(const Json& tree);

/// Types a bare command-line value the same way a YAML plain scalar is typed.
Json parse_scalar(std::string_view text);

/// Dot-separated key path; integer segments index lists.
std::vector<std::string> split_key_path(std::string_view path);
std::string key_path_to_pointer(std::string_view path);

/// Pointer to the node addressed by `path`, or nullptr when it does not exist.
Json* find_key_path(Json& tree, std::string_view path);
const Json* find_key_path(const Json& tree, std::string_view path);

/// Replaces an existing node. Throws ConfigError("unknown key ...") when the
/// path does not resolve, and on scalar/container type mismatch.
void set_key_path(Json& tree, std::string_view path, const Json& value);

std::string read_text_file(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_text_file_atomic(const std::string& path, std::string_view contents);

}  // namespace socsim

namespace socsim {

/// Schema violation at a JSON pointer inside a document. Callers holding the
/// source Document translate the pointer into a line/column.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : ConfigError(what + (pointer.empty() ? std::string() : " at " + pointer)),
        pointer_(std::move(pointer)),
        message_(what) {}

  const std::string& pointer() const { return pointer_; }
  const std::string& message() const { return message_; }

 private:
  std::string pointer_;
  std::string message_;
};

/// Strict object reader: every key must be consumed, otherwise finish()
/// reports the first unknown one.
class Fields {
 public:
  Fields(const Json& obj, std::string pointer);

  bool has(const std::string& key) const { return obj_.contains(key); }
  const Json* raw(const std::string& key);
  std::string pointer(const std::string& key) const { return pointer_ + "/" + key; }
  const std::string& pointer() const { return pointer_; }

  std::string str(const std::string& key, const std::string& def);
  std::string require_str(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t def);
  std::int64_t require_integer(const std::string& key);
  double number(const std::string& key, double def);
  bool boolean(const std::string& key, bool def);

  void finish() const;

 private:
  const Json& obj_;
  std::string pointer_;
  std::set<std::string> seen_;
};

}  // namespace socsim
