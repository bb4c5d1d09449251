#include "socsim/run_artifact.hpp"

#include <unistd.h>

#include <filesystem>

namespace socsim {

namespace fs = std::filesystem;

std::string pretty_json(const Json& j) { return j.dump(2) + "\n"; }

std::string experiment_dir(const std::string& out_root, const std::string& scenario_name) {
  return (fs::path(out_root) / (scenario_name + "_experiment")).string();
}

namespace {

void write_file(const fs::path& p, std::string_view contents) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string() + ": " + ec.message());
  write_text_file_atomic(p.string(), contents);
}

RunArtifact describe(const fs::path& dir, const Json& manifest) {
  RunArtifact a;
  a.dir = dir.string();
  a.config_path = (dir / "config.resolved").string();
  a.seed_path = (dir / "seed").string();
  a.scenario_path = (dir / "scenario.snapshot").string();
  a.events_path = (dir / "events.log").string();
  a.probes_dir = (dir / "probes").string();
  a.eval_dir = (dir / "eval").string();
  if (fs::is_directory(a.eval_dir)) {
    for (const auto& e : fs::directory_iterator(a.eval_dir))
      if (e.is_regular_file()) a.eval_files.push_back(e.path().string());
    std::sort(a.eval_files.begin(), a.eval_files.end());
  }
  a.seed = manifest.value("seed", std::uint64_t{0});
  a.digest = manifest.value("digest", std::string());
  a.complete = manifest.value("complete", false);
  a.manifest = manifest;
  return a;
}

}  // namespace

RunArtifact record_run(const ResolvedConfig& rc, const RunOutputs& outputs, const std::string& out_root,
                       const std::string& timestamp) {
  for (const auto& p : outputs.eval_paths)
    if (!fs::is_regular_file(p)) throw IoError("eval file not found: " + p);

  const fs::path parent = experiment_dir(out_root, rc.scenario.name);
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());

  const fs::path staging =
      parent / (".partial-" + timestamp + "-" + std::to_string(::getpid()) + "-" + short_digest(rc.digest + timestamp));
  fs::remove_all(staging, ec);
  fs::create_directories(staging / "probes");
  fs::create_directories(staging / "eval");

  Json files = Json::array({"config.resolved", "seed", "scenario.snapshot", "events.log"});
  write_file(staging / "config.resolved", pretty_json(rc.tree));
  write_file(staging / "seed", std::to_string(rc.seed) + "\n");
  write_file(staging / "scenario.snapshot", to_yaml(OrderedJson(to_json(rc.scenario))));
  write_file(staging / "events.log", outputs.events.serialize());
  for (const auto& [name, contents] : outputs.probe_files) {
    write_file(staging / "probes" / name, contents);
    files.push_back("probes/" + name);
  }
  for (const auto& [rel, contents] : outputs.extra_files) {
    write_file(staging / rel, contents);
    files.push_back(rel);
  }
  for (const auto& [name, doc] : outputs.eval_docs) {
    write_file(staging / "eval" / name, pretty_json(doc));
    files.push_back("eval/" + name);
  }
  for (const auto& p : outputs.eval_paths) {
    const auto name = fs::path(p).filename();
    fs::copy_file(p, staging / "eval" / name, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy eval file " + p + ": " + ec.message());
    files.push_back("eval/" + name.string());
  }

  const Json manifest{{"digest", rc.digest},
                      {"seed", rc.seed},
                      {"scenario", rc.scenario.name},
                      {"simulation", rc.config.name},
                      {"started_at", outputs.started_at},
                      {"finished_at", outputs.finished_at},
                      {"wall_clock_s", outputs.wall_clock_s},
                      {"complete", outputs.events.complete()},
                      {"files", files}};
  write_file(staging / "manifest.json", pretty_json(manifest));

  // claim the first free name; rename fails if a concurrent run took it
  fs::path final_dir;
  for (int n = 0;; ++n) {
    final_dir = parent / (n == 0 ? timestamp : timestamp + "_" + std::to_string(n));
    if (fs::exists(final_dir)) continue;
    fs::rename(staging, final_dir, ec);
    if (!ec) break;
    if (n > 1000) throw IoError("cannot place run bundle under " + parent.string() + ": " + ec.message());
  }

  auto artifact = load_run(final_dir.string());
  return artifact;
}

RunArtifact load_run(const std::string& dir) {
  const fs::path d(dir);
  const auto manifest_path = d / "manifest.json";
  if (!fs::is_regular_file(manifest_path)) throw IoError("not a run bundle (no manifest.json): " + dir);
  Json manifest;
  try {
    manifest = Json::parse(read_text_file(manifest_path.string()));
  } catch (const Json::parse_error& e) {
    throw IoError("corrupt manifest " + manifest_path.string() + ": " + e.what());
  }
  auto a = describe(d, manifest);
  for (const auto& p : {a.config_path, a.seed_path, a.scenario_path, a.events_path})
    if (!fs::is_regular_file(p)) throw IoError("run bundle is missing " + p);
  verify_run(a);
  return a;
}

void verify_run(const RunArtifact& a) {
  Json tree;
  try {
    tree = Json::parse(read_text_file(a.config_path));
  } catch (const Json::parse_error& e) {
    throw IoError("corrupt " + a.config_path + ": " + e.what());
  }
  const auto digest = sha256_hex(canonical_bytes(tree));
  if (digest != a.digest)
    throw IoError("digest mismatch for " + a.config_path + ": stored " + a.digest + ", recomputed " + digest);
}

ArtifactView open_artifact(const std::string& dir) {
  const auto a = load_run(dir);
  ArtifactView v;
  v.dir = a.dir;
  v.rc = resolved_from_tree(Json::parse(read_text_file(a.config_path)));
  if (v.rc.digest != a.digest)
    throw IoError("resolved config in " + dir + " does not re-resolve to its stored digest");
  v.events = EventLog::parse(read_text_file(a.events_path));
  if (fs::is_directory(a.probes_dir))
    for (const auto& e : fs::directory_iterator(a.probes_dir))
      if (e.is_regular_file()) v.probe_files[e.path().filename().string()] = read_text_file(e.path().string());
  return v;
}

std::string write_eval_doc(const std::string& dir, const std::string& name, const Json& doc) {
  const auto p = fs::path(dir) / "eval" / name;
  write_file(p, pretty_json(doc));
  return p.string();
}

}  // namespace socsim
