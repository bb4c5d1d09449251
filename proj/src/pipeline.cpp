#include "socsim/pipeline.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace socsim {

namespace fs = std::filesystem;

namespace {

std::mutex record_mutex;  // bundle directory names are picked by timestamp

void write_atomic(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << body;
    if (!out) throw IoError("write failed: " + tmp);
  }
  fs::rename(tmp, p);
}

class FileLock {
 public:
  explicit FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path);
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock " + path);
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

bool same_seed(const std::optional<std::uint64_t>& a, const std::optional<std::uint64_t>& b) { return a == b; }

}  // namespace

ExecutedRun execute_run(const ResolvedConfig& rc, const std::string& out_root) {
  ExecutedRun out;
  const auto started = timestamp_now();
  const auto t0 = std::chrono::steady_clock::now();
  auto result = run_simulation(rc);
  RunOutputs o = collect_outputs(result);
  o.started_at = started;
  o.finished_at = timestamp_now();
  o.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::lock_guard<std::mutex> g(record_mutex);
    out.artifact = record_run(rc, o, out_root);
  }
  out.complete = result.complete;
  out.error = result.error;
  out.eval_files = evaluate_and_write(out.artifact.dir);
  return out;
}

std::vector<CellState> study_cells(const StudySpec& study) {
  std::vector<CellState> cells;
  std::vector<std::optional<std::uint64_t>> seeds;
  if (study.seeds.empty()) seeds.push_back(std::nullopt);
  for (auto s : study.seeds) seeds.emplace_back(s);
  for (const auto& h : study.hypotheses)
    for (const auto& c : h.conditions)
      for (const auto& scenario : study.scenarios)
        for (const auto& seed : seeds) {
          CellState cell{h.id, c.id, scenario, seed, "pending", ""};
          for (const auto& r : c.runs)
            if (r.scenario == scenario && same_seed(r.seed, seed)) {
              cell.state = "done";
              cell.detail = r.source;
            }
          if (cell.state == "pending")
            for (const auto& f : c.failures)
              if (f.scenario == scenario && same_seed(f.seed, seed)) {
                cell.state = "failed";
                cell.detail = f.message;
              }
          cells.push_back(cell);
        }
  return cells;
}

StudyRunSummary run_study(const std::string& study_path, const StudyRunOptions& opts) {
  FileLock lock(study_path + ".lock");
  StudySpec study = load_study_file(study_path);
  if (opts.hypothesis && !study.find_hypothesis(*opts.hypothesis))
    throw ConfigError("unknown hypothesis '" + *opts.hypothesis + "'");
  if (study.config.empty()) throw ConfigError("study has no 'config' entry naming the base simulation config");
  const auto base_dir = fs::path(study_path).parent_path();
  const auto config_path = (base_dir / study.config).lexically_normal().string();
  const SimulationConfig base = load_config_file(config_path);

  StudyRunSummary summary;
  std::vector<CellState> todo;
  for (const auto& cell : study_cells(study)) {
    if (opts.hypothesis && cell.hypothesis != *opts.hypothesis) continue;
    if (cell.state == "done")
      ++summary.skipped;
    else
      todo.push_back(cell);
  }

  std::mutex study_mutex;
  auto save = [&] { write_atomic(study_path, serialize_study(study)); };
  auto run_cell = [&](const CellState& cell) {
    Overrides ov = study.run_overrides;
    std::string cli;
    {
      std::lock_guard<std::mutex> g(study_mutex);
      cli = find_condition(*study.find_hypothesis(cell.hypothesis), cell.condition)->cli_override;
    }
    for (auto& o : parse_cli_override(cli)) ov.push_back(std::move(o));
    ov.emplace_back("scenario", cell.scenario);
    if (cell.seed) ov.emplace_back("seed", *cell.seed);

    std::string failure;
    std::optional<ExecutedRun> done;
    try {
      auto rc = resolve(base, ov);
      auto ex = execute_run(rc, opts.out_root);
      if (ex.complete)
        done = std::move(ex);
      else
        failure = ex.error + " (partial bundle: " + ex.artifact.dir + ")";
    } catch (const std::exception& e) {
      failure = e.what();
    }

    std::lock_guard<std::mutex> g(study_mutex);
    if (done) {
      const auto eval_path =
          study_eval_path(opts.out_root, study, cell.hypothesis, cell.condition, cell.scenario, cell.seed);
      fs::create_directories(fs::path(eval_path).parent_path());
      fs::copy_file(done->eval_files.back(), eval_path, fs::copy_options::overwrite_existing);
      study = link_run(std::move(study), cell.hypothesis, cell.condition, done->artifact, cell.scenario, eval_path,
                       cell.seed);
      Hypothesis* hh = study.find_hypothesis(cell.hypothesis);
      if (hh->status == HypothesisStatus::Proposed) hh->status = HypothesisStatus::Testing;
      ++summary.new_runs;
    } else {
      auto& notes = find_condition(*study.find_hypothesis(cell.hypothesis), cell.condition)->failures;
      notes.erase(std::remove_if(notes.begin(), notes.end(),
                                 [&](const FailureNote& f) { return f.scenario == cell.scenario && f.seed == cell.seed; }),
                  notes.end());
      notes.push_back({cell.scenario, failure, cell.seed});
      ++summary.failures;
    }
    save();
  };

  if (opts.parallel <= 1 || todo.size() <= 1) {
    for (const auto& cell : todo) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto n = std::min<std::size_t>(todo.size(), static_cast<std::size_t>(opts.parallel));
    for (std::size_t w = 0; w < n; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < todo.size(); i = next++) run_cell(todo[i]);
      });
    for (auto& t : pool) t.join();
  }

  for (const auto& h : study.hypotheses) {
    if (opts.hypothesis && h.id != *opts.hypothesis) continue;
    const auto path = study_comparison_path(opts.out_root, study, h.id);
    write_atomic(path, pretty_json(compare_hypothesis(study, h)));
    summary.comparisons.push_back(path);
    if (study.comparison.empty() || summary.comparisons.size() == 1) study.comparison = path;
  }
  save();
  return summary;
}

}  // namespace socsim
