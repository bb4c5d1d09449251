#pragma once

#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "socsim/config.hpp"

namespace socsim {

struct DecodeParams {
  double temperature = 0.7;
  int max_tokens = 512;
  std::optional<std::uint64_t> seed;
};

class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, bool transient) : std::runtime_error(what), transient_(transient) {}
  /// Transient errors skip the turn; the rest abort the run.
  bool transient() const { return transient_; }

 private:
  bool transient_;
};

struct Completion {
  std::string text;
  Json wire;  // raw request/response for transports that have one
};

/// The language-model stand-in behind every agent. Implementations must be
/// safe to call from several threads.
class ModelOracle {
 public:
  virtual ~ModelOracle() = default;
  virtual std::string name() const = 0;
  virtual Completion complete(const std::string& prompt, const DecodeParams& params) = 0;
};

/// Fields of the request line closing every prompt, e.g.
/// "ACTION REQUEST agent=a1 episode=3 step=0".
struct RequestLine {
  std::string verb;  // ACTION | REASONING | PROBE | CONSOLIDATE
  std::string line;
  std::map<std::string, std::string> fields;
};

std::optional<RequestLine> find_request_line(const std::string& prompt);

/// Rule table: the first rule whose `match` regex is found in the prompt
/// answers it, either with a `respond` template, a named `behavior`, or an
/// injected `error`. Pure function of (prompt, fixture seed).
class ScriptedOracle : public ModelOracle {
 public:
  explicit ScriptedOracle(const Json& fixture);
  std::string name() const override { return "scripted"; }
  Completion complete(const std::string& prompt, const DecodeParams& params) override;

 private:
  struct Rule {
    std::string pattern;
    std::regex re;
    std::optional<std::string> respond;
    std::string behavior;
    Json params;
    std::string error;  // "", transient, fatal
  };
  std::vector<Rule> rules_;
  std::string default_;
  std::uint64_t seed_ = 0;

  std::string render(const std::string& tmpl, const std::string& prompt, const std::smatch& m) const;
  std::string random_actor(const std::string& prompt, const Json& params) const;
  std::string bounded_confidence(const std::string& prompt, const Json& params) const;
};

/// OpenAI-format chat completions over HTTP.
class HttpOracle : public ModelOracle {
 public:
  HttpOracle(ModelSpec spec, std::string base_url, std::string api_key);
  std::string name() const override { return "http"; }
  Completion complete(const std::string& prompt, const DecodeParams& params) override;

 private:
  ModelSpec spec_;
  std::string url_;
  std::string api_key_;
};

/// Builds the oracle for a model ref. SOCSIM_API_BASE fills an empty
/// base_url; the key is read from the variable named by api_key_env.
std::shared_ptr<ModelOracle> make_oracle(const ModelSpec& spec);

/// Beliefs of the observation items, and the agent's own previous belief,
/// as printed in a prompt.
std::vector<double> prompt_item_beliefs(const std::string& prompt);
std::optional<double> prompt_self_belief(const std::string& prompt);
std::vector<std::string> prompt_item_refs(const std::string& prompt);

}  // namespace socsim
