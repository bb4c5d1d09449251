#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/evaluation.hpp"
#include "socsim/run_artifact.hpp"
#include "socsim/study.hpp"

namespace socsim {

/// Belief state over time, rebuilt from the event log.
struct BeliefSeries {
  Graph graph;
  std::vector<AgentId> ids;
  BeliefTrajectory trajectory;  // snapshots[0] is the first known state
  std::vector<int> episodes;    // episode of each snapshot; -1 = initial
};

/// What evaluation extracts from one artifact.
struct RunData {
  std::string dir;
  std::string digest;         // config digest
  std::string events_digest;  // sha256 of events.log
  bool complete = false;
  std::vector<AgentId> agents;
  std::vector<AgentCorpus> corpora;             // roster order
  std::map<std::string, ProbeAnswers> probes;   // probe id -> answers
  EngagementStats engagement;
  std::optional<BeliefSeries> beliefs;
  std::vector<std::string> warnings;
};

RunData extract_run(const ArtifactView& view);

/// Eval documents keyed by file name: one per configured metric plus
/// "eval.json" with the aggregates. `stance` overrides the configured
/// provider.
std::map<std::string, Json> evaluate_run(const ArtifactView& view, StanceProvider* stance = nullptr);

/// Evaluates the bundle at `dir` and writes its eval/ files. Returns the
/// written paths, eval.json last.
std::vector<std::string> evaluate_and_write(const std::string& dir);

/// Labels used to group runs in reports.
struct RunLabels {
  std::string scenario;
  std::string model;
  std::string regime;     // budget / intervention / thinking
  std::string algorithm;  // timeline
  std::string condition;  // opinion runs: topology / exposure / memory / self-state
  std::uint64_t seed = 0;
};

RunLabels run_labels(const ResolvedConfig& rc);

struct ReportResult {
  std::string dir;
  std::vector<std::string> files;
  std::vector<std::string> missing;  // "<path>: <reason>"
};

/// Static report over a set of bundles: summary.md, engagement and echo
/// tables, plot-ready CSVs. Unreadable bundles are listed, not fatal.
/// Throws std::invalid_argument on an empty input list.
ReportResult emit_report(const std::vector<std::string>& artifact_dirs, const std::string& out_dir);

/// Cross-condition comparison for one hypothesis, from the eval.json files
/// its run links point at. Missing evals are listed.
Json compare_hypothesis(const StudySpec& study, const Hypothesis& h);

}  // namespace socsim
