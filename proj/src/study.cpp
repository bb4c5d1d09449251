#include "socsim/study.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace socsim {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<HypothesisStatus, std::string>> kStatuses{
    {HypothesisStatus::Proposed, "proposed"}, {HypothesisStatus::Testing, "testing"},
    {HypothesisStatus::Supported, "supported"}, {HypothesisStatus::Refuted, "refuted"},
    {HypothesisStatus::Refined, "refined"}};

HypothesisStatus status_from(const std::string& s, const std::string& pointer) {
  for (const auto& [v, name] : kStatuses)
    if (name == s) return v;
  throw SchemaError(pointer, "unknown status '" + s + "' (expected proposed, testing, supported, refuted or refined)");
}

std::optional<std::uint64_t> opt_seed(Fields& f) {
  if (!f.has("seed")) return std::nullopt;
  const auto v = f.integer("seed", 0);
  if (v < 0) throw SchemaError(f.pointer("seed"), "seed must be an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

Condition condition_from(const std::string& id, const OrderedJson& node, const std::string& pointer) {
  const Json j(node);
  Fields f(j, pointer);
  Condition c;
  c.id = id;
  c.cli_override = f.str("cli_override", "");
  parse_cli_override(c.cli_override);
  if (const Json* runs = f.raw("runs")) {
    if (!runs->is_array()) throw SchemaError(f.pointer("runs"), "expected a list");
    for (std::size_t i = 0; i < runs->size(); ++i) {
      Fields rf((*runs)[i], f.pointer("runs") + "/" + std::to_string(i));
      RunLink r;
      r.scenario = rf.require_str("scenario");
      r.source = rf.require_str("source");
      r.eval = rf.str("eval", "");
      r.seed = opt_seed(rf);
      rf.finish();
      c.runs.push_back(std::move(r));
    }
  }
  if (const Json* fails = f.raw("failures")) {
    if (!fails->is_array()) throw SchemaError(f.pointer("failures"), "expected a list");
    for (std::size_t i = 0; i < fails->size(); ++i) {
      Fields ff((*fails)[i], f.pointer("failures") + "/" + std::to_string(i));
      FailureNote n;
      n.scenario = ff.require_str("scenario");
      n.message = ff.str("message", "");
      n.seed = opt_seed(ff);
      ff.finish();
      c.failures.push_back(std::move(n));
    }
  }
  f.finish();
  return c;
}

Hypothesis hypothesis_from(const std::string& id, const OrderedJson& node, const std::string& pointer) {
  if (!node.is_object()) throw SchemaError(pointer, "expected a mapping");
  Hypothesis h;
  h.id = id;
  OrderedJson conditions;
  Json rest(node);
  if (rest.contains("conditions")) {
    conditions = node["conditions"];
    rest.erase("conditions");
  }
  Fields f(rest, pointer);
  h.statement = f.str("statement", "");
  if (f.has("independent_variable") && !rest["independent_variable"].is_string())
    throw SchemaError(f.pointer("independent_variable"), "a hypothesis names exactly one independent variable");
  h.independent_variable = f.require_str("independent_variable");
  if (trim(h.independent_variable).empty())
    throw SchemaError(f.pointer("independent_variable"), "independent_variable is empty");
  h.prediction = f.str("prediction", "");
  h.status = status_from(f.str("status", "proposed"), f.pointer("status"));
  f.finish();
  if (!conditions.is_null()) {
    if (!conditions.is_object()) throw SchemaError(pointer + "/conditions", "expected a mapping");
    for (const auto& [cid, cnode] : conditions.items())
      h.conditions.push_back(condition_from(cid, cnode, pointer + "/conditions/" + cid));
  }
  return h;
}

StudySpec study_from_tree(const OrderedJson& tree) {
  if (!tree.is_object()) throw SchemaError("", "study document must be a mapping");
  for (const auto& [k, _] : tree.items())
    if (k != "study" && k != "hypotheses" && k != "analysis") throw SchemaError("/" + k, "unknown key '" + k + "'");
  StudySpec s;
  if (!tree.contains("study")) throw SchemaError("/study", "missing required field 'study'");
  const OrderedJson& st = tree["study"];
  if (!st.is_object()) throw SchemaError("/study", "expected a mapping");
  const Json stj(st);
  Fields f(stj, "/study");
  s.name = f.require_str("name");
  s.question = f.str("question", "");
  if (const Json* sc = f.raw("scenarios")) {
    if (!sc->is_array()) throw SchemaError("/study/scenarios", "expected a list");
    for (const auto& x : *sc) {
      if (!x.is_string()) throw SchemaError("/study/scenarios", "scenario refs must be strings");
      s.scenarios.push_back(x.get<std::string>());
    }
  }
  if (f.raw("run_overrides")) {
    const auto& ro = st["run_overrides"];
    if (!ro.is_object() && !ro.is_null()) throw SchemaError("/study/run_overrides", "expected a mapping");
    if (ro.is_object())
      for (const auto& [k, v] : ro.items()) {
        split_key_path(k);
        s.run_overrides.emplace_back(k, Json(v));
      }
  }
  s.config = f.str("config", "");
  if (const Json* seeds = f.raw("seeds")) {
    if (!seeds->is_array()) throw SchemaError("/study/seeds", "expected a list");
    for (const auto& x : *seeds) {
      if (!x.is_number_integer() || x.get<std::int64_t>() < 0)
        throw SchemaError("/study/seeds", "seeds must be unsigned integers");
      s.seeds.push_back(x.get<std::uint64_t>());
    }
  }
  f.finish();

  if (tree.contains("hypotheses") && !tree["hypotheses"].is_null()) {
    const auto& hs = tree["hypotheses"];
    if (!hs.is_object()) throw SchemaError("/hypotheses", "expected a mapping");
    for (const auto& [hid, hnode] : hs.items()) s.hypotheses.push_back(hypothesis_from(hid, hnode, "/hypotheses/" + hid));
  }
  if (tree.contains("analysis") && !tree["analysis"].is_null()) {
    const Json an(tree["analysis"]);
    Fields af(an, "/analysis");
    s.comparison = af.str("comparison", "");
    af.finish();
  }
  for (std::size_t i = 0; i < s.hypotheses.size(); ++i)
    for (const auto& c : s.hypotheses[i].conditions)
      for (const auto& r : c.runs)
        if (std::find(s.scenarios.begin(), s.scenarios.end(), r.scenario) == s.scenarios.end())
          throw SchemaError("/hypotheses/" + s.hypotheses[i].id + "/conditions/" + c.id + "/runs",
                            "run names scenario '" + r.scenario + "' which the study does not list");
  return s;
}

}  // namespace

std::string to_string(HypothesisStatus s) {
  for (const auto& [v, name] : kStatuses)
    if (v == s) return name;
  return "?";
}

Hypothesis* StudySpec::find_hypothesis(const std::string& id) {
  for (auto& h : hypotheses)
    if (h.id == id) return &h;
  return nullptr;
}

const Hypothesis* StudySpec::find_hypothesis(const std::string& id) const {
  for (const auto& h : hypotheses)
    if (h.id == id) return &h;
  return nullptr;
}

Condition* find_condition(Hypothesis& h, const std::string& id) {
  for (auto& c : h.conditions)
    if (c.id == id) return &c;
  return nullptr;
}

StudySpec parse_study(std::string_view text) {
  const auto doc = parse_yaml(text);
  try {
    return study_from_tree(doc.tree);
  } catch (const SchemaError& e) {
    const auto pos = doc.position_of(e.pointer());
    throw ConfigError(e.message() + (e.pointer().empty() ? "" : " at " + e.pointer()), pos.line, pos.column);
  }
}

StudySpec load_study_file(const std::string& path) {
  try {
    return parse_study(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

OrderedJson study_to_json(const StudySpec& s) {
  OrderedJson study = OrderedJson::object();
  study["name"] = s.name;
  study["question"] = s.question;
  study["scenarios"] = s.scenarios;
  OrderedJson ro = OrderedJson::object();
  for (const auto& [k, v] : s.run_overrides) ro[k] = OrderedJson(v);
  study["run_overrides"] = ro;
  if (!s.config.empty()) study["config"] = s.config;
  if (!s.seeds.empty()) study["seeds"] = s.seeds;

  OrderedJson hyps = OrderedJson::object();
  for (const auto& h : s.hypotheses) {
    OrderedJson hj = OrderedJson::object();
    hj["statement"] = h.statement;
    hj["independent_variable"] = h.independent_variable;
    hj["prediction"] = h.prediction;
    hj["status"] = to_string(h.status);
    OrderedJson conds = OrderedJson::object();
    for (const auto& c : h.conditions) {
      OrderedJson cj = OrderedJson::object();
      cj["cli_override"] = c.cli_override;
      OrderedJson runs = OrderedJson::array();
      for (const auto& r : c.runs) {
        OrderedJson rj = OrderedJson::object();
        rj["scenario"] = r.scenario;
        rj["source"] = r.source;
        rj["eval"] = r.eval;
        if (r.seed) rj["seed"] = *r.seed;
        runs.push_back(rj);
      }
      cj["runs"] = runs;
      if (!c.failures.empty()) {
        OrderedJson fails = OrderedJson::array();
        for (const auto& n : c.failures) {
          OrderedJson nj = OrderedJson::object();
          nj["scenario"] = n.scenario;
          if (n.seed) nj["seed"] = *n.seed;
          nj["message"] = n.message;
          fails.push_back(nj);
        }
        cj["failures"] = fails;
      }
      conds[c.id] = cj;
    }
    hj["conditions"] = conds;
    hyps[h.id] = hj;
  }
  OrderedJson root = OrderedJson::object();
  root["study"] = study;
  root["hypotheses"] = hyps;
  OrderedJson analysis = OrderedJson::object();
  analysis["comparison"] = s.comparison;
  root["analysis"] = analysis;
  return root;
}

std::string serialize_study(const StudySpec& s) { return to_yaml(study_to_json(s)); }

StudySpec link_run(StudySpec study, const std::string& hypothesis_id, const std::string& condition_id,
                   const RunArtifact& artifact, const std::string& scenario, const std::string& eval_path,
                   std::optional<std::uint64_t> seed) {
  Hypothesis* h = study.find_hypothesis(hypothesis_id);
  if (!h) throw ConfigError("unknown hypothesis '" + hypothesis_id + "'");
  Condition* c = find_condition(*h, condition_id);
  if (!c) throw ConfigError("unknown condition '" + condition_id + "' under hypothesis '" + hypothesis_id + "'");
  c->runs.push_back({scenario, artifact.dir, eval_path, seed});
  // a successful rerun supersedes the failure note for the same cell
  c->failures.erase(std::remove_if(c->failures.begin(), c->failures.end(),
                                   [&](const FailureNote& n) { return n.scenario == scenario && n.seed == seed; }),
                    c->failures.end());
  return study;
}

Overrides parse_cli_override(const std::string& text) {
  Overrides out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(parse_override(tok));
  return out;
}

std::string study_eval_path(const std::string& out_root, const StudySpec& s, const std::string& hypothesis,
                            const std::string& condition, const std::string& scenario,
                            std::optional<std::uint64_t> seed) {
  fs::path p = fs::path(out_root) / ("eval_" + s.name) / hypothesis / condition / scenario;
  if (seed) p /= "seed_" + std::to_string(*seed);
  return (p / "eval.json").string();
}

std::string study_comparison_path(const std::string& out_root, const StudySpec& s, const std::string& hypothesis) {
  return (fs::path(out_root) / ("eval_" + s.name) / hypothesis / "comparison" / "eval_comparison.json").string();
}

StudySpec study_template(const std::string& name, const std::string& config_path) {
  StudySpec s;
  s.name = name;
  s.question = "";
  s.config = config_path;
  s.run_overrides.emplace_back("simulation.execution.max_steps", 10);
  Hypothesis h;
  h.id = "h1";
  h.independent_variable = "model";
  h.status = HypothesisStatus::Proposed;
  h.conditions.push_back({"baseline", "", {}, {}});
  h.conditions.push_back({"treatment", "", {}, {}});
  s.hypotheses.push_back(h);
  s.comparison = "outputs/eval_" + name + "/h1/comparison/eval_comparison.json";
  return s;
}

}  // namespace socsim
