#include "socsim/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace socsim {

namespace fs = std::filesystem;

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json summary_json(const Summary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"ci95", s.ci95}};
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << body;
  if (!out) throw IoError("write failed: " + p.string());
}

BeliefSeries opinion_series(const Json& init, const EventLog& log) {
  BeliefSeries s;
  for (const auto& a : init.at("agents")) s.ids.push_back(a.get<std::string>());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < s.ids.size(); ++i) index[s.ids[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : init.at("edges")) edges.emplace_back(index.at(e[0].get<std::string>()), index.at(e[1].get<std::string>()));
  s.graph = Graph::from_edges(static_cast<int>(s.ids.size()), edges);

  Eigen::VectorXd cur(static_cast<Eigen::Index>(s.ids.size()));
  for (std::size_t i = 0; i < s.ids.size(); ++i) cur(static_cast<Eigen::Index>(i)) = init.at("beliefs")[i].get<double>();
  s.trajectory.snapshots.push_back(cur);
  s.episodes.push_back(-1);
  for (const auto& r : log.records()) {
    const auto type = r.value("type", std::string());
    if (type == "belief") {
      const int i = index.at(r.at("agent").get<std::string>());
      const double v = r.at("value").get<double>();
      s.trajectory.steps.push_back({r.at("episode").get<int>(), i, v - cur(i)});
      cur(i) = v;
    } else if (type == "episode_end") {
      s.trajectory.snapshots.push_back(cur);
      s.episodes.push_back(r.at("episode").get<int>());
    }
  }
  return s;
}

// Beliefs in the social environment come from belief-probe answers; the
// neighbor relation is a follow in either direction.
std::optional<BeliefSeries> social_series(const Json& init, const EventLog& log, const std::string& probe,
                                          std::vector<std::string>& warnings) {
  BeliefSeries s;
  for (const auto& a : init.at("agents")) s.ids.push_back(a.get<std::string>());
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < s.ids.size(); ++i) index[s.ids[i]] = static_cast<int>(i);
  std::set<std::pair<int, int>> edges;
  for (const auto& f : init.at("follows")) {
    auto a = index.find(f[0].get<std::string>()), b = index.find(f[1].get<std::string>());
    if (a == index.end() || b == index.end() || a->second == b->second) continue;
    edges.emplace(std::min(a->second, b->second), std::max(a->second, b->second));
  }
  s.graph = Graph::from_edges(static_cast<int>(s.ids.size()), {edges.begin(), edges.end()});

  const auto n = static_cast<Eigen::Index>(s.ids.size());
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(n);
  std::vector<bool> known(s.ids.size(), false);
  bool any = false;
  for (const auto& r : log.records()) {
    const auto type = r.value("type", std::string());
    if (type == "probe" && r.value("probe", std::string()) == probe && !r.at("value").is_null()) {
      auto it = index.find(r.at("agent").get<std::string>());
      if (it == index.end()) continue;
      const double v = r.at("value").get<double>();
      if (known[static_cast<std::size_t>(it->second)])
        s.trajectory.steps.push_back({r.at("episode").get<int>(), it->second, v - cur(it->second)});
      cur(it->second) = v;
      known[static_cast<std::size_t>(it->second)] = true;
      any = true;
    } else if (type == "episode_end" && std::all_of(known.begin(), known.end(), [](bool k) { return k; })) {
      s.trajectory.snapshots.push_back(cur);
      s.episodes.push_back(r.at("episode").get<int>());
    }
  }
  if (!any) return std::nullopt;
  if (s.trajectory.snapshots.empty()) {
    warnings.push_back("belief probe '" + probe + "' was not answered by every agent; belief metrics missing");
    return std::nullopt;
  }
  return s;
}

std::string budget_label(const BudgetPolicy& b) {
  switch (b.kind) {
    case BudgetPolicy::Kind::Single: return "single";
    case BudgetPolicy::Kind::Fixed: return "fixed(" + std::to_string(b.n) + ")";
    case BudgetPolicy::Kind::AgentDecided: return "agent_decided(cap " + std::to_string(b.n) + ")";
  }
  return "?";
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(prec);
  ss << v;
  return ss.str();
}

std::string signed_fmt(double v) { return (v >= 0 ? "+" : "") + fmt(v); }

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>(), 12);
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

}  // namespace

RunData extract_run(const ArtifactView& view) {
  RunData d;
  d.dir = view.dir;
  d.digest = view.rc.digest;
  d.events_digest = sha256_hex(view.events.serialize());
  d.complete = view.events.complete();

  const auto inits = view.events.of_type("world_init");
  if (inits.empty()) throw IoError(view.dir + ": events.log has no world_init record");
  const Json& init = *inits.front();
  for (const auto& a : init.at("agents")) d.agents.push_back(a.get<std::string>());

  std::map<AgentId, std::vector<std::string>> texts;
  for (const auto& r : view.events.records()) {
    const auto type = r.value("type", std::string());
    if (type == "action") {
      const auto kind = r.value("kind", std::string());
      if ((kind == "post" || kind == "reply") && r.contains("text") && r["text"].is_string() && !r.value("duplicate", false))
        texts[r.at("agent").get<std::string>()].push_back(r["text"].get<std::string>());
    } else if (type == "probe") {
      auto& per = d.probes[r.at("probe").get<std::string>()][r.at("agent").get<std::string>()];
      per.push_back(r.at("value").is_null() ? std::nullopt : std::optional<double>(r.at("value").get<double>()));
    }
  }
  for (const auto& a : d.agents) d.corpora.push_back(AgentCorpus::from_posts(a, texts[a]));
  d.engagement = engagement_stats(view.events);

  if (init.value("environment", std::string()) == "opinion_graph")
    d.beliefs = opinion_series(init, view.events);
  else
    d.beliefs = social_series(init, view.events, view.rc.config.environment.opinion.belief_probe, d.warnings);
  if (!d.complete) d.warnings.push_back("run is incomplete; metrics cover the recorded prefix");
  return d;
}

std::map<std::string, Json> evaluate_run(const ArtifactView& view, StanceProvider* stance) {
  const RunData d = extract_run(view);
  const auto& cfg = view.rc.config;
  std::map<std::string, Json> docs;
  Json aggregates = Json::object();

  auto doc = [&](const std::string& metric) {
    return Json{{"metric", metric}, {"artifact_digest", d.digest}, {"events_digest", d.events_digest},
                {"complete", d.complete}};
  };
  auto per_agent_mean = [&](const std::string& metric, auto&& f) {
    Json j = doc(metric);
    Json per = Json::object();
    std::vector<double> vals;
    Json missing = Json::array();
    for (const auto& c : d.corpora) {
      auto v = f(c);
      per[c.agent] = opt(v);
      if (v)
        vals.push_back(*v);
      else
        missing.push_back(c.agent);
    }
    j["per_agent"] = per;
    j["missing"] = missing;
    j["aggregate_kind"] = "mean";
    j["aggregate"] = vals.empty() ? Json(nullptr) : Json(summarize(vals).mean);
    aggregates[metric] = j["aggregate"];
    docs[metric + ".json"] = j;
  };

  for (const auto& metric : cfg.evaluation.metrics) {
    if (metric == "ttr") {
      per_agent_mean(metric, [](const AgentCorpus& c) { return ttr(c); });
    } else if (metric == "opener_variety") {
      per_agent_mean(metric, [](const AgentCorpus& c) { return opener_variety(c); });
    } else if (metric == "inter_agent_distinctiveness") {
      Json j = doc(metric);
      Json eligible = Json::array();
      for (const auto& c : d.corpora)
        if (c.posts.size() >= 2) eligible.push_back(c.agent);
      j["eligible_agents"] = eligible;
      j["aggregate_kind"] = "value";
      j["aggregate"] = opt(inter_agent_distinctiveness(d.corpora));
      aggregates[metric] = j["aggregate"];
      docs[metric + ".json"] = j;
    } else if (metric == "probe_diversity") {
      Json j = doc(metric);
      Json probes = Json::object();
      std::vector<double> vals;
      for (const auto& [id, answers] : d.probes) {
        Json means = Json::object();
        for (const auto& [agent, vs] : answers) {
          std::vector<double> got;
          for (const auto& v : vs)
            if (v) got.push_back(*v);
          means[agent] = got.empty() ? Json(nullptr) : Json(summarize(got).mean);
        }
        auto v = probe_diversity(answers);
        if (v) vals.push_back(*v);
        probes[id] = {{"per_agent_mean", means}, {"value", opt(v)}};
      }
      j["probes"] = probes;
      j["aggregate_kind"] = "mean over probes";
      j["aggregate"] = vals.empty() ? Json(nullptr) : Json(summarize(vals).mean);
      aggregates[metric] = j["aggregate"];
      docs[metric + ".json"] = j;
    } else if (metric == "stance") {
      Json j = doc(metric);
      const std::string claim = cfg.evaluation.stance.claim.empty() ? view.rc.scenario.claim : cfg.evaluation.stance.claim;
      std::unique_ptr<StanceProvider> own;
      StanceProvider* provider = stance;
      if (!provider) {
        if (cfg.evaluation.stance.provider == "http")
          own = std::make_unique<HttpStance>(cfg.evaluation.stance.url);
        else
          own = std::make_unique<LexiconStance>();
        provider = own.get();
      }
      j["claim"] = claim;
      j["provider"] = stance ? "override" : cfg.evaluation.stance.provider;
      if (claim.empty()) {
        j["aggregate"] = nullptr;
        j["note"] = "no claim configured";
      } else {
        Json per = Json::object();
        std::vector<double> all;
        int failed = 0;
        for (const auto& c : d.corpora) {
          std::vector<double> s;
          for (const auto& p : c.posts) {
            auto v = stance_score(p, claim, *provider);
            if (v)
              s.push_back(*v);
            else
              ++failed;
          }
          per[c.agent] = s.empty() ? Json(nullptr) : Json(summarize(s).mean);
          all.insert(all.end(), s.begin(), s.end());
        }
        j["per_agent"] = per;
        j["failed_posts"] = failed;
        j["aggregate_kind"] = "mean over posts";
        j["aggregate"] = all.empty() ? Json(nullptr) : Json(summarize(all).mean);
      }
      aggregates[metric] = j["aggregate"];
      docs[metric + ".json"] = j;
    } else if (metric == "engagement") {
      const auto& e = d.engagement;
      Json j = doc(metric);
      Json per = Json::object();
      std::map<AgentId, std::pair<int, int>> by_agent;  // accepted, active episodes
      for (const auto& [key, n] : e.per_turn) {
        by_agent[key.second].first += n;
        by_agent[key.second].second += 1;
      }
      for (const auto& [a, p] : by_agent)
        per[a] = {{"accepted", p.first}, {"active_episodes", p.second},
                  {"per_episode", static_cast<double>(p.first) / p.second}};
      j["per_agent"] = per;
      j["accepted"] = e.accepted;
      j["active_agent_episodes"] = e.active_agent_episodes;
      j["total"] = e.total;
      j["counts"] = e.counts;
      j["composition"] = e.composition;
      j["posts"] = e.posts;
      j["interactions"] = e.interactions;
      j["partial"] = e.partial;
      j["aggregate_kind"] = "accepted per active agent-episode";
      j["aggregate"] = e.total;
      aggregates[metric] = e.total;
      docs[metric + ".json"] = j;
    } else if (metric == "polarization" || metric == "global_disagreement" || metric == "nci") {
      Json j = doc(metric);
      if (!d.beliefs) {
        j["aggregate"] = nullptr;
        j["note"] = "no belief data";
        aggregates[metric] = nullptr;
        aggregates[metric + "_delta"] = nullptr;
        docs[metric + ".json"] = j;
        continue;
      }
      const auto& b = *d.beliefs;
      std::vector<std::string> warnings;
      Json series = Json::array();
      std::vector<std::optional<double>> vals;
      for (std::size_t s = 0; s < b.trajectory.snapshots.size(); ++s) {
        const auto& snap = b.trajectory.snapshots[s];
        std::optional<double> v;
        if (metric == "polarization")
          v = polarization(snap);
        else if (metric == "nci")
          v = nci(b.graph, snap);
        else
          v = global_disagreement(b.graph, snap, s == 0 ? &warnings : nullptr);
        vals.push_back(v);
        series.push_back({{"episode", b.episodes[s]}, {"value", opt(v)}});
      }
      j["series"] = series;
      j["initial"] = opt(vals.front());
      j["final"] = opt(vals.back());
      j["delta"] = vals.front() && vals.back() ? Json(*vals.back() - *vals.front()) : Json(nullptr);
      if (!warnings.empty()) j["warnings"] = warnings;
      j["aggregate_kind"] = "final";
      j["aggregate"] = j["final"];
      aggregates[metric] = j["final"];
      aggregates[metric + "_delta"] = j["delta"];
      docs[metric + ".json"] = j;
    } else if (metric == "volatility") {
      Json j = doc(metric);
      j["aggregate_kind"] = "mean |change| per agent-step";
      j["aggregate"] = d.beliefs ? opt(volatility(d.beliefs->trajectory)) : Json(nullptr);
      aggregates[metric] = j["aggregate"];
      docs[metric + ".json"] = j;
    }
  }

  const auto l = run_labels(view.rc);
  docs["eval.json"] = {{"artifact", fs::path(view.dir).filename().string()},
                       {"artifact_digest", d.digest},
                       {"events_digest", d.events_digest},
                       {"scenario", l.scenario},
                       {"seed", view.rc.seed},
                       {"complete", d.complete},
                       {"labels", {{"model", l.model}, {"regime", l.regime}, {"algorithm", l.algorithm},
                                   {"condition", l.condition}}},
                       {"metrics", aggregates},
                       {"warnings", d.warnings}};
  return docs;
}

std::vector<std::string> evaluate_and_write(const std::string& dir) {
  const auto view = open_artifact(dir);
  auto docs = evaluate_run(view);
  std::vector<std::string> paths;
  for (const auto& [name, j] : docs)
    if (name != "eval.json") paths.push_back(write_eval_doc(dir, name, j));
  paths.push_back(write_eval_doc(dir, "eval.json", docs.at("eval.json")));
  return paths;
}

RunLabels run_labels(const ResolvedConfig& rc) {
  RunLabels l;
  l.scenario = rc.scenario.name;
  l.seed = rc.seed;
  const auto& c = rc.config;
  if (!c.agents.empty()) {
    const auto& a = c.agents.front();
    l.model = a.model;
    std::string regime = budget_label(c.engine.budget);
    if (a.cognition.intervention != InterventionPreset::None) regime += " + " + to_string(a.cognition.intervention);
    if (a.cognition.action_prompt != ActionPromptPreset::None) regime += " + " + to_string(a.cognition.action_prompt);
    if (a.cognition.thinking) regime += " + thinking";
    l.regime = regime;
    if (c.environment.component == "opinion_graph")
      l.condition = c.environment.opinion.topology + " / " + c.environment.opinion.exposure + " / " +
                    to_string(a.memory.kind) + " / " + (a.cognition.self_state_feedback ? "self-state" : "no self-state");
    else
      l.condition = to_string(a.memory.kind) + " / " + (a.cognition.self_state_feedback ? "self-state" : "no self-state");
  }
  l.algorithm = c.environment.component == "twitter_like" ? c.environment.social.timeline : std::string("-");
  return l;
}

// ---------------------------------------------------------------------------

namespace {

struct ReportRun {
  std::string dir;
  RunLabels labels;
  RunData data;
  Json metrics;
};

std::string cell_text(const Summary& s, int prec = 2) { return fmt(s.mean, prec) + "±" + fmt(s.sd, prec); }

// Table 1 layout: one block per (model, scenario); rows are regimes, columns
// timeline algorithms; bold marks the row maximum, stars a Holm-adjusted
// paired Wilcoxon against chronological (seed-matched, >= 5 pairs).
std::string engagement_table(const std::vector<ReportRun>& runs) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::map<std::string, std::map<std::string, std::map<std::uint64_t, double>>>> blocks;
  std::set<std::string> algos;
  for (const auto& r : runs) {
    if (r.labels.algorithm == "-") continue;
    blocks[{r.labels.model, r.labels.scenario}][r.labels.regime][r.labels.algorithm][r.labels.seed] = r.data.engagement.total;
    algos.insert(r.labels.algorithm);
  }
  if (blocks.empty()) return {};
  std::vector<std::string> cols;
  if (algos.count("chronological")) cols.push_back("chronological");
  for (const auto& a : algos)
    if (a != "chronological") cols.push_back(a);

  std::string out = "# Engagement: mean total actions per active agent per active episode (mean±sd over seeds)\n\n";
  for (const auto& [key, rows] : blocks) {
    out += "## model " + key.first + ", scenario " + key.second + "\n\n| Regime |";
    for (const auto& c : cols) out += " " + c + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < cols.size(); ++i) out += "---:|";
    out += "\n";
    for (const auto& [regime, by_algo] : rows) {
      std::map<std::string, Summary> sums;
      double best = -1e300;
      for (const auto& [a, seeds] : by_algo) {
        std::vector<double> v;
        for (const auto& [_, x] : seeds) v.push_back(x);
        sums[a] = summarize(v);
        best = std::max(best, sums[a].mean);
      }
      std::map<std::string, double> adjusted;
      auto chrono = by_algo.find("chronological");
      if (chrono != by_algo.end()) {
        std::map<std::string, std::vector<PairedSample>> fam;
        for (const auto& [a, seeds] : by_algo) {
          if (a == "chronological") continue;
          PairedSample ps{a, {}, {}};
          for (const auto& [seed, x] : seeds) {
            auto it = chrono->second.find(seed);
            if (it == chrono->second.end()) continue;
            ps.x.push_back(x);
            ps.y.push_back(it->second);
          }
          if (ps.x.size() >= 5) fam["row"].push_back(ps);
        }
        for (const auto& [_, tests] : wilcoxon_holm(fam))
          for (const auto& t : tests) adjusted[t.label] = t.p_adjusted;
      }
      out += "| " + regime + " |";
      for (const auto& c : cols) {
        auto it = sums.find(c);
        if (it == sums.end()) {
          out += " - |";
          continue;
        }
        std::string cell = cell_text(it->second);
        if (it->second.mean == best && sums.size() > 1) cell = "**" + cell + "**";
        if (auto p = adjusted.find(c); p != adjusted.end()) cell += p->second < 0.01 ? "^**" : p->second < 0.05 ? "^*" : "";
        out += " " + cell + " (n=" + std::to_string(it->second.n) + ") |";
      }
      out += "\n";
    }
    out += "\n";
  }
  out += "Stars: Holm-adjusted paired Wilcoxon against chronological within the row (* p<0.05, ** p<0.01).\n";
  return out;
}

// Table 3 layout: final belief metrics per condition, plus the delta view.
std::string echo_table(const std::vector<ReportRun>& runs) {
  std::map<std::string, std::map<std::string, std::vector<double>>> rows;  // label -> metric -> values
  for (const auto& r : runs) {
    if (!r.data.beliefs) continue;
    const auto label = r.labels.model + " / " + r.labels.scenario + " / " + r.labels.condition;
    auto& row = rows[label];
    for (const char* m : {"polarization", "nci", "global_disagreement", "volatility", "polarization_delta",
                          "nci_delta", "global_disagreement_delta"}) {
      auto it = r.metrics.find(m);
      if (it != r.metrics.end() && it->is_number()) row[m].push_back(it->get<double>());
    }
  }
  if (rows.empty()) return {};
  auto cell = [](const std::map<std::string, std::vector<double>>& row, const char* m, bool sd, bool sign) {
    auto it = row.find(m);
    if (it == row.end() || it->second.empty()) return std::string("-");
    const auto s = summarize(it->second);
    std::string t = sign ? signed_fmt(s.mean) : fmt(s.mean);
    if (sd) t += "±" + fmt(s.sd);
    return t;
  };
  std::string out = "# Belief dynamics: final metrics (mean±sd over seeds)\n\n";
  out += "| Regime | Polarization | NCI | Global Disagreement | Volatility |\n|---|---:|---:|---:|---:|\n";
  for (const auto& [label, row] : rows)
    out += "| " + label + " | " + cell(row, "polarization", true, false) + " | " + cell(row, "nci", true, false) + " | " +
           cell(row, "global_disagreement", true, false) + " | " + cell(row, "volatility", false, false) + " |\n";
  out += "\n# Belief dynamics: change from the initial state\n\n";
  out += "| Condition | ΔPolarization | ΔGlobal Disagreement | ΔNCI |\n|---|---:|---:|---:|\n";
  for (const auto& [label, row] : rows)
    out += "| " + label + " | " + cell(row, "polarization_delta", false, true) + " | " +
           cell(row, "global_disagreement_delta", false, true) + " | " + cell(row, "nci_delta", false, true) + " |\n";
  out += "\nVolatility is the mean absolute belief change per agent-step. 95% CI half-widths are in runs.csv.\n";
  return out;
}

}  // namespace

ReportResult emit_report(const std::vector<std::string>& artifact_dirs, const std::string& out_dir) {
  if (artifact_dirs.empty()) throw std::invalid_argument("report needs at least one artifact");
  ReportResult res;
  res.dir = out_dir;
  std::vector<ReportRun> runs;
  for (const auto& dir : artifact_dirs) {
    try {
      auto view = open_artifact(dir);
      ReportRun r{dir, run_labels(view.rc), extract_run(view), {}};
      r.metrics = evaluate_run(view).at("eval.json").at("metrics");
      runs.push_back(std::move(r));
    } catch (const std::exception& e) {
      res.missing.push_back(dir + ": " + e.what());
    }
  }

  std::vector<std::string> metric_cols;
  {
    std::set<std::string> seen;
    for (const auto& r : runs)
      for (const auto& [k, _] : r.metrics.items()) seen.insert(k);
    metric_cols.assign(seen.begin(), seen.end());
  }
  std::string runs_csv = "artifact,scenario,seed,model,regime,algorithm,condition,complete";
  for (const auto& m : metric_cols) runs_csv += "," + m;
  runs_csv += "\n";
  for (const auto& r : runs) {
    runs_csv += csv_cell(r.dir) + "," + csv_cell(r.labels.scenario) + "," + std::to_string(r.labels.seed) + "," +
                csv_cell(r.labels.model) + "," + csv_cell(r.labels.regime) + "," + csv_cell(r.labels.algorithm) + "," +
                csv_cell(r.labels.condition) + "," + (r.data.complete ? "true" : "false");
    for (const auto& m : metric_cols) runs_csv += "," + (r.metrics.contains(m) ? csv_cell(r.metrics[m]) : std::string());
    runs_csv += "\n";
  }

  std::string comp_csv = "artifact,kind,count,share\n";
  for (const auto& r : runs)
    for (const auto& [k, n] : r.data.engagement.counts)
      comp_csv += csv_cell(r.dir) + "," + k + "," + std::to_string(n) + "," +
                  format_double(r.data.engagement.composition.at(k), 12) + "\n";

  std::string series_csv = "artifact,episode,polarization,nci,global_disagreement\n";
  for (const auto& r : runs) {
    if (!r.data.beliefs) continue;
    const auto& b = *r.data.beliefs;
    for (std::size_t s = 0; s < b.trajectory.snapshots.size(); ++s) {
      const auto& snap = b.trajectory.snapshots[s];
      series_csv += csv_cell(r.dir) + "," + std::to_string(b.episodes[s]) + "," + csv_cell(opt(polarization(snap))) +
                    "," + csv_cell(opt(nci(b.graph, snap))) + "," + csv_cell(opt(global_disagreement(b.graph, snap))) + "\n";
    }
  }

  // metric summaries grouped like the tables
  std::string summary = "# Run report\n\n";
  summary += std::to_string(runs.size()) + " run(s) read, " + std::to_string(res.missing.size()) + " missing.\n\n";
  if (!res.missing.empty()) {
    summary += "## Missing\n\n";
    for (const auto& m : res.missing) summary += "- " + m + "\n";
    summary += "\n";
  }
  summary += "## Runs\n\n| Artifact | Scenario | Seed | Model | Regime | Timeline | Complete |\n|---|---|---:|---|---|---|---|\n";
  for (const auto& r : runs)
    summary += "| " + r.dir + " | " + r.labels.scenario + " | " + std::to_string(r.labels.seed) + " | " + r.labels.model +
               " | " + r.labels.regime + " | " + r.labels.algorithm + " | " + (r.data.complete ? "yes" : "no") + " |\n";
  summary += "\n## Metric means (mean, sd, 95% CI half-width)\n\n| Metric | n | Mean | SD | CI95 |\n|---|---:|---:|---:|---:|\n";
  for (const auto& m : metric_cols) {
    std::vector<double> v;
    for (const auto& r : runs)
      if (r.metrics.contains(m) && r.metrics[m].is_number()) v.push_back(r.metrics[m].get<double>());
    if (v.empty()) continue;
    const auto s = summarize(v);
    summary += "| " + m + " | " + std::to_string(s.n) + " | " + fmt(s.mean, 4) + " | " + fmt(s.sd, 4) + " | " +
               fmt(s.ci95, 4) + " |\n";
  }

  std::map<std::string, std::string> files{{"summary.md", summary},
                                           {"runs.csv", runs_csv},
                                           {"engagement_composition.csv", comp_csv},
                                           {"echo_series.csv", series_csv}};
  if (auto t = engagement_table(runs); !t.empty()) files["engagement_table.md"] = t;
  if (auto t = echo_table(runs); !t.empty()) files["echo_table.md"] = t;
  if (!res.missing.empty()) {
    std::string m;
    for (const auto& x : res.missing) m += x + "\n";
    files["missing.txt"] = m;
  }
  for (const auto& [name, body] : files) {
    write_text(fs::path(out_dir) / name, body);
    res.files.push_back((fs::path(out_dir) / name).string());
  }
  return res;
}

// ---------------------------------------------------------------------------

Json compare_hypothesis(const StudySpec& study, const Hypothesis& h) {
  Json cells = Json::array();
  Json missing = Json::array();
  // metric -> scenario -> condition -> seed -> value
  std::map<std::string, std::map<std::string, std::map<std::string, std::map<std::string, double>>>> values;
  std::vector<std::string> condition_ids;
  for (const auto& c : h.conditions) condition_ids.push_back(c.id);

  for (const auto& c : h.conditions) {
    for (const auto& scenario : study.scenarios) {
      Json cell{{"condition", c.id}, {"scenario", scenario}};
      Json links = Json::array();
      std::map<std::string, std::vector<double>> per_metric;
      for (const auto& run : c.runs) {
        if (run.scenario != scenario) continue;
        links.push_back({{"source", run.source}, {"eval", run.eval},
                         {"seed", run.seed ? Json(*run.seed) : Json(nullptr)}});
        Json ev;
        try {
          ev = Json::parse(read_text(run.eval));
        } catch (const std::exception& e) {
          missing.push_back({{"condition", c.id}, {"scenario", scenario}, {"eval", run.eval}, {"reason", e.what()}});
          continue;
        }
        const std::string seed_key = run.seed ? std::to_string(*run.seed) : std::to_string(ev.value("seed", 0ULL));
        for (const auto& [m, v] : ev.at("metrics").items()) {
          if (!v.is_number()) continue;
          per_metric[m].push_back(v.get<double>());
          values[m][scenario][c.id][seed_key] = v.get<double>();
        }
      }
      for (const auto& f : c.failures)
        if (f.scenario == scenario)
          missing.push_back({{"condition", c.id}, {"scenario", scenario}, {"reason", f.message}});
      Json metrics = Json::object();
      for (const auto& [m, v] : per_metric) metrics[m] = summary_json(summarize(v));
      cell["runs"] = links;
      cell["metrics"] = metrics;
      cells.push_back(cell);
    }
  }

  // seed-matched tests against the first condition, Holm within each metric
  Json tests = Json::object();
  if (condition_ids.size() >= 2) {
    std::map<std::string, std::vector<PairedSample>> families;
    for (const auto& [m, by_scenario] : values)
      for (const auto& [scenario, by_cond] : by_scenario) {
        auto ref = by_cond.find(condition_ids.front());
        if (ref == by_cond.end()) continue;
        for (std::size_t k = 1; k < condition_ids.size(); ++k) {
          auto other = by_cond.find(condition_ids[k]);
          if (other == by_cond.end()) continue;
          PairedSample ps{scenario + ":" + condition_ids[k] + " vs " + condition_ids.front(), {}, {}};
          for (const auto& [seed, x] : other->second)
            if (auto it = ref->second.find(seed); it != ref->second.end()) {
              ps.x.push_back(x);
              ps.y.push_back(it->second);
            }
          if (ps.x.size() >= 5) families[m].push_back(ps);
        }
      }
    for (const auto& [m, list] : wilcoxon_holm(families)) {
      Json arr = Json::array();
      for (const auto& t : list) {
        Json e{{"comparison", t.label}, {"n", t.test.n_used}, {"w_plus", t.test.w_plus}, {"p", t.test.p},
               {"p_holm", t.p_adjusted}, {"exact", t.test.exact}};
        if (!t.test.warning.empty()) e["warning"] = t.test.warning;
        arr.push_back(e);
      }
      tests[m] = arr;
    }
  }

  return {{"study", study.name},
          {"question", study.question},
          {"hypothesis", h.id},
          {"statement", h.statement},
          {"independent_variable", h.independent_variable},
          {"prediction", h.prediction},
          {"status", to_string(h.status)},
          {"scenarios", study.scenarios},
          {"conditions", condition_ids},
          {"cells", cells},
          {"tests", tests},
          {"missing", missing}};
}

}  // namespace socsim
