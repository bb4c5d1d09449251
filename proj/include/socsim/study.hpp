#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socsim/config.hpp"
#include "socsim/run_artifact.hpp"

namespace socsim {

enum class HypothesisStatus { Proposed, Testing, Supported, Refuted, Refined };

std::string to_string(HypothesisStatus);

struct RunLink {
  std::string scenario;
  std::string source;  // run bundle directory
  std::string eval;    // eval.json path
  std::optional<std::uint64_t> seed;

  bool operator==(const RunLink&) const = default;
};

/// A cell that failed; kept so that reruns can retry it.
struct FailureNote {
  std::string scenario;
  std::string message;
  std::optional<std::uint64_t> seed;

  bool operator==(const FailureNote&) const = default;
};

struct Condition {
  std::string id;
  std::string cli_override;  // whitespace-separated key=value assignments
  std::vector<RunLink> runs;
  std::vector<FailureNote> failures;

  bool operator==(const Condition&) const = default;
};

struct Hypothesis {
  std::string id;
  std::string statement;
  std::string independent_variable;
  std::string prediction;
  HypothesisStatus status = HypothesisStatus::Proposed;
  std::vector<Condition> conditions;

  bool operator==(const Hypothesis&) const = default;
};

struct StudySpec {
  std::string name;
  std::string question;
  std::vector<std::string> scenarios;
  Overrides run_overrides;
  std::string config;                // base simulation config, relative to the study file
  std::vector<std::uint64_t> seeds;  // empty = the config's own seed
  std::vector<Hypothesis> hypotheses;
  std::string comparison;  // analysis.comparison

  bool operator==(const StudySpec&) const = default;

  Hypothesis* find_hypothesis(const std::string& id);
  const Hypothesis* find_hypothesis(const std::string& id) const;
};

Condition* find_condition(Hypothesis& h, const std::string& id);

StudySpec parse_study(std::string_view text);
StudySpec load_study_file(const std::string& path);
OrderedJson study_to_json(const StudySpec& s);
std::string serialize_study(const StudySpec& s);

/// Appends a run entry under (hypothesis, condition). Throws ConfigError for
/// unknown ids.
StudySpec link_run(StudySpec study, const std::string& hypothesis_id, const std::string& condition_id,
                   const RunArtifact& artifact, const std::string& scenario, const std::string& eval_path,
                   std::optional<std::uint64_t> seed = std::nullopt);

/// Splits a condition's cli_override into override entries.
Overrides parse_cli_override(const std::string& text);

/// outputs/eval_<study>/<hypothesis>/<condition>/<scenario>[/seed_<s>]/eval.json
std::string study_eval_path(const std::string& out_root, const StudySpec& s, const std::string& hypothesis,
                            const std::string& condition, const std::string& scenario,
                            std::optional<std::uint64_t> seed);
std::string study_comparison_path(const std::string& out_root, const StudySpec& s, const std::string& hypothesis);

/// A skeleton study with one proposed hypothesis and two empty conditions.
StudySpec study_template(const std::string& name, const std::string& config_path);

}  // namespace socsim
