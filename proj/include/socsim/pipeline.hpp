#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socsim/engine.hpp"
#include "socsim/report.hpp"
#include "socsim/study.hpp"

namespace socsim {

struct ExecutedRun {
  RunArtifact artifact;
  bool complete = false;
  std::string error;  // set when the run stopped early
  std::vector<std::string> eval_files;
};

/// run -> record -> evaluate. The bundle is written even for incomplete runs.
ExecutedRun execute_run(const ResolvedConfig& rc, const std::string& out_root);

struct StudyRunOptions {
  std::optional<std::string> hypothesis;
  std::string out_root = "outputs";
  int parallel = 1;
};

struct StudyRunSummary {
  int new_runs = 0;
  int skipped = 0;
  int failures = 0;
  std::vector<std::string> comparisons;
};

/// Fills every (condition x scenario [x seed]) cell that has no linked run,
/// then rewrites the comparison documents. The study file is locked for the
/// whole call and rewritten after every cell.
StudyRunSummary run_study(const std::string& study_path, const StudyRunOptions& opts);

struct CellState {
  std::string hypothesis;
  std::string condition;
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string state;  // done | failed | pending
  std::string detail;
};

std::vector<CellState> study_cells(const StudySpec& study);

}  // namespace socsim
