#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/config.hpp"
#include "socsim/event_log.hpp"

namespace socsim {

/// Everything a finished run hands to record_run.
struct RunOutputs {
  EventLog events;
  std::map<std::string, std::string> probe_files;  // file name under probes/ -> contents
  std::map<std::string, std::string> extra_files;  // bundle-relative path -> contents
  std::map<std::string, Json> eval_docs;           // file name under eval/ -> document
  std::vector<std::string> eval_paths;             // existing files copied into eval/
  std::string started_at;
  std::string finished_at;
  double wall_clock_s = 0.0;
};

struct RunArtifact {
  std::string dir;
  std::string config_path;
  std::string seed_path;
  std::string scenario_path;
  std::string events_path;
  std::string probes_dir;
  std::string eval_dir;
  std::vector<std::string> eval_files;
  std::uint64_t seed = 0;
  std::string digest;
  bool complete = false;
  Json manifest;
};

/// `<out_root>/<scenario>_experiment`.
std::string experiment_dir(const std::string& out_root, const std::string& scenario_name);

/// Writes the bundle under `<experiment_dir>/<timestamp>[_N]` via a temporary
/// directory and a rename, then reads it back and checks the digest.
/// Throws IoError on any write failure or a missing eval path.
RunArtifact record_run(const ResolvedConfig& rc, const RunOutputs& outputs, const std::string& out_root,
                       const std::string& timestamp = timestamp_now());

/// Opens an existing bundle and verifies its config digest.
RunArtifact load_run(const std::string& dir);

/// Recomputes the digest of config.resolved; throws IoError on mismatch.
void verify_run(const RunArtifact& artifact);

/// The artifact contents evaluation is allowed to read.
struct ArtifactView {
  std::string dir;
  ResolvedConfig rc;
  EventLog events;
  std::map<std::string, std::string> probe_files;
};

ArtifactView open_artifact(const std::string& dir);

/// Writes an eval document into the bundle's eval/ directory.
std::string write_eval_doc(const std::string& dir, const std::string& name, const Json& doc);

/// Pretty sorted JSON with a trailing newline: the on-disk form of every
/// JSON document this project writes.
std::string pretty_json(const Json& j);

}  // namespace socsim
