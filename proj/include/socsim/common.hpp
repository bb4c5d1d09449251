#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace socsim {

using AgentId = std::string;
using PostId = std::string;

/// Malformed or inconsistent configuration. Carries a 1-based line/column
/// when the error can be traced back to a source document (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) +
                                          ", column " + std::to_string(column) + ")"
                                    : what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unrecoverable failure inside a running simulation.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Randomness. The standard distributions are implementation-defined, so all
// draws go through these helpers to keep runs identical across toolchains.

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a base seed with any number of integer or string components.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);
std::uint64_t fnv1a64(std::string_view bytes);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Bernoulli draw.
  bool chance(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::string_view bytes);

/// First 16 hex chars of the SHA-256, used for text digests in event records.
std::string short_digest(std::string_view bytes);

// ---------------------------------------------------------------------------
// Text

/// Lowercased \w+ tokens. ASCII letters, digits and '_' are word characters;
/// any byte >= 0x80 is treated as a word character so UTF-8 words stay whole.
/// This is the single tokenizer behind every lexical metric and the hash
/// embedding.
std::vector<std::string> tokenize(std::string_view text);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Local wall-clock time formatted as YYYY-MM-DD_HH-MM-SS.
std::string timestamp_now();

std::string format_double(double v, int precision = 6);

}  // namespace socsim
