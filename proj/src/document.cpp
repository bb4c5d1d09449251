#include "socsim/document.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "socsim/common.hpp"

namespace socsim {

namespace {

const std::regex kIntRe(R"([-+]?[0-9]+)");
const std::regex kFloatRe(R"([-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?)");

Json type_plain_scalar(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (std::regex_match(s, kIntRe)) {
    try {
      return std::stoll(s);
    } catch (const std::out_of_range&) {
      return s;
    }
  }
  if (std::regex_match(s, kFloatRe)) return std::stod(s);
  if (s == ".inf" || s == "+.inf") return std::numeric_limits<double>::infinity();
  if (s == "-.inf") return -std::numeric_limits<double>::infinity();
  if (s == ".nan") return std::numeric_limits<double>::quiet_NaN();
  return s;
}

std::string escape_pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

OrderedJson convert(const YAML::Node& node, const std::string& pointer,
                    std::map<std::string, SourcePos>& positions) {
  const auto mark = node.Mark();
  if (!mark.is_null()) positions[pointer] = SourcePos{mark.line + 1, mark.column + 1};
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      if (node.Tag() == "!") return node.Scalar();  // quoted
      return OrderedJson(type_plain_scalar(node.Scalar()));
    case YAML::NodeType::Sequence: {
      OrderedJson arr = OrderedJson::array();
      std::size_t i = 0;
      for (const auto& child : node) {
        arr.push_back(convert(child, pointer + "/" + std::to_string(i), positions));
        ++i;
      }
      return arr;
    }
    case YAML::NodeType::Map: {
      OrderedJson obj = OrderedJson::object();
      for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (obj.contains(key)) {
          const auto km = kv.first.Mark();
          throw ConfigError("duplicate key '" + key + "'", km.line + 1, km.column + 1);
        }
        obj[key] = convert(kv.second, pointer + "/" + escape_pointer_token(key), positions);
      }
      return obj;
    }
  }
  return nullptr;
}

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  if (!type_plain_scalar(s).is_string()) return true;  // would retype as number/bool/null
  static const std::string kSpecialLead = "-?:,[]{}#&*!|>'\"%@`~ ";
  if (kSpecialLead.find(s.front()) != std::string::npos) return true;
  if (std::isspace(static_cast<unsigned char>(s.back()))) return true;
  if (s.find(": ") != std::string::npos || s.find(" #") != std::string::npos) return true;
  if (s.back() == ':') return true;
  for (char c : s)
    if (c == '\n' || c == '\t' || c == '\r' || static_cast<unsigned char>(c) < 0x20) return true;
  return false;
}

void emit(YAML::Emitter& out, const OrderedJson& v) {
  switch (v.type()) {
    case OrderedJson::value_t::object:
      out << YAML::BeginMap;
      for (const auto& [k, child] : v.items()) {
        out << YAML::Key << k << YAML::Value;
        emit(out, child);
      }
      out << YAML::EndMap;
      break;
    case OrderedJson::value_t::array:
      out << YAML::BeginSeq;
      for (const auto& child : v) emit(out, child);
      out << YAML::EndSeq;
      break;
    case OrderedJson::value_t::string: {
      const auto& s = v.get_ref<const std::string&>();
      if (needs_quotes(s))
        out << YAML::DoubleQuoted << s;
      else
        out << s;
      break;
    }
    case OrderedJson::value_t::boolean:
      out << (v.get<bool>() ? "true" : "false");
      break;
    case OrderedJson::value_t::number_integer:
      out << v.get<std::int64_t>();
      break;
    case OrderedJson::value_t::number_unsigned:
      out << v.get<std::uint64_t>();
      break;
    case OrderedJson::value_t::number_float: {
      // JSON's shortest round-trip form; force a decimal point so it retypes as float
      std::string s = OrderedJson(v.get<double>()).dump();
      if (s.find_first_of(".eE") == std::string::npos && s != "null") s += ".0";
      out << s;
      break;
    }
    default:
      out << YAML::Null;
  }
}

}  // namespace

SourcePos Document::position_of(const std::string& pointer) const {
  // walk up to the closest ancestor that has a recorded position
  std::string p = pointer;
  while (true) {
    auto it = positions.find(p);
    if (it != positions.end()) return it->second;
    if (p.empty()) return {};
    p.erase(p.rfind('/'));
  }
}

Document parse_yaml(std::string_view text) {
  Document doc;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("parse failure: " + e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  doc.tree = convert(root, "", doc.positions);
  return doc;
}

Document load_yaml_file(const std::string& path) { return parse_yaml(read_text_file(path)); }

std::string to_yaml(const OrderedJson& tree) {
  YAML::Emitter out;
  out.SetIndent(2);
  out.SetSeqFormat(YAML::Block);
  out.SetMapFormat(YAML::Block);
  emit(out, tree);
  std::string s = out.c_str();
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

std::string canonical_bytes(const Json& tree) { return tree.dump(); }

Json parse_scalar(std::string_view text) {
  const std::string s(text);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return type_plain_scalar(s);
}

std::vector<std::string> split_key_path(std::string_view path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError("malformed key path '" + std::string(path) + "'");
  return parts;
}

std::string key_path_to_pointer(std::string_view path) {
  std::string out;
  for (const auto& seg : split_key_path(path)) out += "/" + escape_pointer_token(seg);
  return out;
}

namespace {
template <typename J>
J* walk(J& tree, std::string_view path) {
  J* node = &tree;
  for (const auto& seg : split_key_path(path)) {
    if (node->is_object()) {
      auto it = node->find(seg);
      if (it == node->end()) return nullptr;
      node = &*it;
    } else if (node->is_array()) {
      if (seg.find_first_not_of("0123456789") != std::string::npos) return nullptr;
      const auto idx = std::stoull(seg);
      if (idx >= node->size()) return nullptr;
      node = &(*node)[idx];
    } else {
      return nullptr;
    }
  }
  return node;
}

bool compatible(const Json& current, const Json& value) {
  if (current.is_null() || value.is_null()) return true;
  if (current.is_number() && value.is_number()) return true;
  if (current.is_object() != value.is_object()) return false;
  if (current.is_array() != value.is_array()) return false;
  if (current.is_boolean() != value.is_boolean()) return false;
  if (current.is_string() && value.is_number()) return true;  // ids like "7" typed as ints
  return current.is_string() == value.is_string() || current.is_structured();
}
}  // namespace

Json* find_key_path(Json& tree, std::string_view path) { return walk(tree, path); }
const Json* find_key_path(const Json& tree, std::string_view path) { return walk(tree, path); }

void set_key_path(Json& tree, std::string_view path, const Json& value) {
  Json* node = find_key_path(tree, path);
  if (node == nullptr) throw ConfigError("unknown key '" + std::string(path) + "'");
  if (!compatible(*node, value))
    throw ConfigError("type mismatch for '" + std::string(path) + "': expected " +
                      std::string(node->type_name()) + ", got " + value.type_name());
  if (node->is_string() && value.is_number())
    *node = value.dump();
  else
    *node = value;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename into '" + path + "': " + ec.message());
}

}  // namespace socsim

namespace socsim {

Fields::Fields(const Json& obj, std::string pointer) : obj_(obj), pointer_(std::move(pointer)) {
  if (!obj_.is_object()) throw SchemaError(pointer_, "expected a mapping");
}

const Json* Fields::raw(const std::string& key) {
  seen_.insert(key);
  auto it = obj_.find(key);
  if (it == obj_.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string Fields::str(const std::string& key, const std::string& def) {
  const Json* v = raw(key);
  if (!v) return def;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number()) return v->dump();
  throw SchemaError(pointer(key), "type mismatch: expected string, got " + std::string(v->type_name()));
}

std::string Fields::require_str(const std::string& key) {
  if (!raw(key)) throw SchemaError(pointer(key), "missing required field '" + key + "'");
  return str(key, "");
}

std::int64_t Fields::integer(const std::string& key, std::int64_t def) {
  const Json* v = raw(key);
  if (!v) return def;
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_number_float()) {
    const double d = v->get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
  }
  throw SchemaError(pointer(key), "type mismatch: expected integer, got " + std::string(v->type_name()));
}

std::int64_t Fields::require_integer(const std::string& key) {
  if (!raw(key)) throw SchemaError(pointer(key), "missing required field '" + key + "'");
  return integer(key, 0);
}

double Fields::number(const std::string& key, double def) {
  const Json* v = raw(key);
  if (!v) return def;
  if (v->is_number()) return v->get<double>();
  throw SchemaError(pointer(key), "type mismatch: expected number, got " + std::string(v->type_name()));
}

bool Fields::boolean(const std::string& key, bool def) {
  const Json* v = raw(key);
  if (!v) return def;
  if (v->is_boolean()) return v->get<bool>();
  throw SchemaError(pointer(key), "type mismatch: expected boolean, got " + std::string(v->type_name()));
}

void Fields::finish() const {
  for (const auto& [k, _] : obj_.items())
    if (!seen_.count(k)) throw SchemaError(pointer_ + "/" + k, "unknown key '" + k + "'");
}

}  // namespace socsim
