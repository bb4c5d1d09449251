#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socsim/agent_spec.hpp"
#include "socsim/document.hpp"
#include "socsim/engine_config.hpp"
#include "socsim/scenario.hpp"

namespace socsim {

struct EmbeddingSpec {
  std::string provider = "hash";  // hash | http
  int dim = 256;
  std::string url;
  std::string model;
  double timeout_s = 30.0;

  bool operator==(const EmbeddingSpec&) const = default;
};

struct SocialParams {
  std::string timeline = "chronological";  // chronological | recommender
  int timeline_k = 10;
  EmbeddingSpec embedding;
  int context_excerpt_chars = 600;

  bool operator==(const SocialParams&) const = default;
};

struct OpinionParams {
  std::string topology = "scale_free";  // scale_free | small_world | random
  int m = 2;                            // scale_free attachment count
  int ring_degree = 4;                  // small_world lattice degree
  double rewire = 0.1;                  // small_world rewiring probability
  double p = 0.2;                       // random edge probability
  std::string exposure = "similarity";  // similarity | opposing | random
  int k = 3;
  double belief_min = 1.0;
  double belief_max = 10.0;
  std::string belief_probe = "belief";
  int context_excerpt_chars = 600;

  bool operator==(const OpinionParams&) const = default;
};

struct EnvironmentSpec {
  std::string component = "twitter_like";  // twitter_like | opinion_graph
  SocialParams social;
  OpinionParams opinion;

  bool operator==(const EnvironmentSpec&) const = default;
};

struct ModelSpec {
  std::string oracle = "scripted";  // scripted | http
  Json fixture;                     // scripted: path (authored) or inlined rule table
  std::string base_url;
  std::string model;
  std::string api_key_env = "SOCSIM_API_KEY";
  double temperature = 0.7;
  int max_tokens = 512;
  double timeout_s = 60.0;
  int retries = 2;

  bool operator==(const ModelSpec&) const = default;
};

struct StanceSpec {
  std::string provider = "lexicon";  // lexicon | http
  std::string url;
  std::string claim;  // defaults to the scenario claim

  bool operator==(const StanceSpec&) const = default;
};

struct EvaluationSpec {
  std::vector<Probe> probes;
  std::vector<std::string> metrics;
  StanceSpec stance;

  bool operator==(const EvaluationSpec&) const = default;
};

using Overrides = std::vector<std::pair<std::string, Json>>;

/// Registered names, checked when a config is parsed.
const std::vector<std::string>& environment_components();
const std::vector<std::string>& metric_names();

struct SimulationConfig {
  std::string name = "simulation";
  std::optional<std::uint64_t> seed;
  EngineConfig engine;
  EnvironmentSpec environment;
  std::vector<AgentSpec> agents;  // empty while the roster depends on an unresolved scenario
  std::map<std::string, ModelSpec> models;
  EvaluationSpec evaluation;
  std::string scenario_ref;         // name or path; empty when inline
  std::optional<Scenario> scenario; // inline scenario
  Overrides overrides;

  Json tree;             // authored document as a JSON tree
  std::string base_dir;  // directory relative references resolve against
};

struct ResolvedConfig {
  SimulationConfig config;  // fully materialized: scenario inline, roster explicit
  Scenario scenario;
  std::uint64_t seed = 0;
  Json tree;
  std::string digest;  // sha256 over canonical_bytes(tree)

  std::string canonical() const { return canonical_bytes(tree); }
};

/// Parses a configuration document. Errors carry line/column where known.
SimulationConfig parse_config(std::string_view text, const std::string& base_dir = ".");
SimulationConfig load_config_file(const std::string& path);

/// Builds the typed view of a config tree (no line/column mapping).
SimulationConfig config_from_tree(const Json& tree, const std::string& base_dir = ".");

/// Inlines references, materializes the agent roster, then applies
/// config.overrides followed by extra_overrides (later wins).
ResolvedConfig resolve(const SimulationConfig& config, const Overrides& extra_overrides = {});

/// Re-resolves a stored resolved tree (e.g. config.resolved of a run bundle).
ResolvedConfig resolved_from_tree(const Json& tree);

/// Parses `key.path=value` into an override entry.
std::pair<std::string, Json> parse_override(std::string_view assignment);

}  // namespace socsim
