// socsim: command-line entry point.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "socsim/pipeline.hpp"

namespace fs = std::filesystem;
using namespace socsim;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3, kPartialStudy = 4 };

std::string default_out() {
  const char* env = std::getenv("SOCSIM_OUTPUT_ROOT");
  return env && *env ? env : "outputs";
}

struct RunArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string oracle;
  std::optional<int> parallel;
  std::string from_artifact;
};

// --oracle http | scripted:<fixture>, applied to every model entry.
Overrides oracle_overrides(const SimulationConfig& cfg, const std::string& spec) {
  Overrides ov;
  if (spec.empty()) return ov;
  if (spec == "http") {
    for (const auto& [name, _] : cfg.models) ov.emplace_back("models." + name + ".oracle", "http");
  } else if (spec.rfind("scripted:", 0) == 0) {
    const auto fixture = fs::absolute(spec.substr(9)).lexically_normal().string();
    for (const auto& [name, _] : cfg.models) {
      ov.emplace_back("models." + name + ".oracle", "scripted");
      ov.emplace_back("models." + name + ".fixture", fixture);
    }
  } else {
    throw ConfigError("--oracle expects 'http' or 'scripted:<fixture>', got '" + spec + "'");
  }
  return ov;
}

int cmd_run(const RunArgs& a) {
  ResolvedConfig rc;
  if (!a.from_artifact.empty()) {
    if (!a.sets.empty() || a.seed || !a.oracle.empty() || a.parallel)
      throw ConfigError("--from-artifact replays the recorded config; other run flags are not accepted");
    rc = open_artifact(a.from_artifact).rc;
  } else {
    if (a.config.empty()) throw CLI::RequiredError("config");
    const auto cfg = load_config_file(a.config);
    Overrides ov;
    for (const auto& s : a.sets) ov.push_back(parse_override(s));
    for (auto& o : oracle_overrides(cfg, a.oracle)) ov.push_back(std::move(o));
    if (a.parallel) ov.emplace_back("simulation.execution.parallelism", *a.parallel);
    if (a.seed) ov.emplace_back("seed", *a.seed);
    Json inv{{"set", a.sets}, {"oracle", a.oracle}};
    if (a.seed) inv["seed"] = *a.seed;
    if (a.parallel) inv["parallel"] = *a.parallel;
    ov.emplace_back("invocation", inv);
    rc = resolve(cfg, ov);
  }
  const auto ex = execute_run(rc, a.out.empty() ? default_out() : a.out);
  std::cout << ex.artifact.dir << "\n";
  if (!ex.complete) {
    std::cerr << "run stopped early: " << ex.error << "\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_study_status(const std::string& path) {
  const auto study = load_study_file(path);
  int done = 0, failed = 0, pending = 0;
  for (const auto& c : study_cells(study)) {
    std::cout << c.hypothesis << "  " << c.condition << "  " << c.scenario;
    if (c.seed) std::cout << "  seed=" << *c.seed;
    std::cout << "  " << c.state;
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << "\n";
    (c.state == "done" ? done : c.state == "failed" ? failed : pending) += 1;
  }
  std::cout << done << " done, " << failed << " failed, " << pending << " pending\n";
  return kOk;
}

// Study files expand to their linked run sources.
std::vector<std::string> report_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> dirs;
  for (const auto& in : inputs) {
    if (fs::is_regular_file(in)) {
      const auto study = load_study_file(in);
      for (const auto& h : study.hypotheses)
        for (const auto& c : h.conditions)
          for (const auto& r : c.runs) dirs.push_back(r.source);
    } else {
      dirs.push_back(in);
    }
  }
  return dirs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"socsim: configurable multi-agent social simulation"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run one simulation and record its bundle");
  run->add_option("config", ra.config, "simulation config (YAML)");
  run->add_option("--set", ra.sets, "override key.path=value (repeatable)");
  run->add_option("--seed", ra.seed, "run seed");
  run->add_option("--out", ra.out, "output root (default $SOCSIM_OUTPUT_ROOT or ./outputs)");
  run->add_option("--oracle", ra.oracle, "http | scripted:<fixture>");
  run->add_option("--parallel", ra.parallel, "worker threads for parallel dynamics");
  run->add_option("--from-artifact", ra.from_artifact, "replay the config recorded in a run bundle");

  std::string init_path, init_name, init_config;
  auto* sinit = app.add_subcommand("study-init", "write a study skeleton");
  sinit->add_option("path", init_path, "study file to create")->required();
  sinit->add_option("--name", init_name, "study name");
  sinit->add_option("--config", init_config, "base simulation config, relative to the study file")->required();

  std::string study_path, hypothesis, study_out;
  int study_parallel = 1;
  auto* srun = app.add_subcommand("study-run", "fill every study cell that has no run");
  srun->add_option("study", study_path, "study file")->required();
  srun->add_option("--hypothesis", hypothesis, "only this hypothesis");
  srun->add_option("--out", study_out, "output root");
  srun->add_option("--parallel", study_parallel, "cells run concurrently")->check(CLI::PositiveNumber);

  std::string status_path;
  auto* sstat = app.add_subcommand("study-status", "list study cells and their state");
  sstat->add_option("study", status_path, "study file")->required();

  std::vector<std::string> eval_dirs;
  auto* eval = app.add_subcommand("eval", "evaluate run bundles into their eval/ directories");
  eval->add_option("artifacts", eval_dirs, "run bundle directories")->required();

  std::string cmp_study, cmp_h, cmp_out;
  auto* cmp = app.add_subcommand("compare", "write comparison documents for a study");
  cmp->add_option("study", cmp_study, "study file")->required();
  cmp->add_option("--hypothesis", cmp_h, "only this hypothesis");
  cmp->add_option("--out", cmp_out, "output root");

  std::vector<std::string> scenario_refs;
  auto* sval = app.add_subcommand("scenario-validate", "check scenario files");
  sval->add_option("scenarios", scenario_refs, "scenario files or names")->required();

  std::vector<std::string> report_in;
  std::string report_out = "report";
  auto* rep = app.add_subcommand("report", "static report over run bundles or a study");
  rep->add_option("inputs", report_in, "run bundle directories or study files");
  rep->add_option("--out", report_out, "report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(ra);

    if (*sinit) {
      if (fs::exists(init_path)) throw ConfigError(init_path + " already exists");
      if (init_name.empty()) init_name = fs::path(init_path).stem().string();
      std::ofstream(init_path) << serialize_study(study_template(init_name, init_config));
      std::cout << init_path << "\n";
      return kOk;
    }

    if (*srun) {
      StudyRunOptions o;
      if (!hypothesis.empty()) o.hypothesis = hypothesis;
      o.out_root = study_out.empty() ? default_out() : study_out;
      o.parallel = study_parallel;
      const auto s = run_study(study_path, o);
      std::cout << s.new_runs << " new run(s), " << s.skipped << " already linked, " << s.failures << " failed\n";
      for (const auto& c : s.comparisons) std::cout << c << "\n";
      return s.failures > 0 ? kPartialStudy : kOk;
    }

    if (*sstat) return cmd_study_status(status_path);

    if (*eval) {
      for (const auto& d : eval_dirs)
        for (const auto& p : evaluate_and_write(d)) std::cout << p << "\n";
      return kOk;
    }

    if (*cmp) {
      const auto study = load_study_file(cmp_study);
      const auto root = cmp_out.empty() ? default_out() : cmp_out;
      bool found = false;
      for (const auto& h : study.hypotheses) {
        if (!cmp_h.empty() && h.id != cmp_h) continue;
        found = true;
        const auto path = study_comparison_path(root, study, h.id);
        fs::create_directories(fs::path(path).parent_path());
        std::ofstream(path, std::ios::binary) << pretty_json(compare_hypothesis(study, h));
        std::cout << path << "\n";
      }
      if (!found) throw ConfigError("unknown hypothesis '" + cmp_h + "'");
      return kOk;
    }

    if (*sval) {
      int bad = 0;
      for (const auto& ref : scenario_refs) {
        const auto path = find_scenario_file(ref, {"."});
        const auto s = load_scenario_file(path);
        const auto v = validate_scenario(s);
        if (v.empty()) {
          std::cout << path << ": ok (" << s.actors.size() << " actors, " << s.streams.size() << " streams)\n";
        } else {
          ++bad;
          for (const auto& x : v) std::cout << path << ": " << x.path << ": " << x.message << "\n";
        }
      }
      return bad ? kConfig : kOk;
    }

    if (*rep) {
      if (report_in.empty()) {
        std::cerr << "report: no inputs given\n" << rep->help();
        return kUsage;
      }
      const auto r = emit_report(report_inputs(report_in), report_out);
      for (const auto& f : r.files) std::cout << f << "\n";
      for (const auto& m : r.missing) std::cerr << "missing: " << m << "\n";
      return kOk;
    }
  } catch (const CLI::RequiredError& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
