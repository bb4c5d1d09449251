#include "socsim/config.hpp"

#include <algorithm>
#include <filesystem>

namespace socsim {

namespace fs = std::filesystem;

const std::vector<std::string>& environment_components() {
  static const std::vector<std::string> v{"twitter_like", "opinion_graph"};
  return v;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> v{"ttr",         "opener_variety", "inter_agent_distinctiveness",
                                          "probe_diversity", "stance",     "engagement",
                                          "polarization", "global_disagreement", "nci",
                                          "volatility"};
  return v;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Json deep_merge(Json base, const Json& patch) {
  if (!base.is_object() || !patch.is_object()) return patch;
  for (const auto& [k, v] : patch.items()) {
    if (base.contains(k) && base[k].is_object() && v.is_object())
      base[k] = deep_merge(base[k], v);
    else
      base[k] = v;
  }
  return base;
}

SocialParams social_params(const Json* j, const std::string& pointer) {
  SocialParams p;
  if (!j) return p;
  Fields f(*j, pointer);
  p.timeline = f.str("timeline", "chronological");
  if (p.timeline != "chronological" && p.timeline != "recommender")
    throw SchemaError(f.pointer("timeline"), "unknown component '" + p.timeline + "'");
  p.timeline_k = static_cast<int>(f.integer("timeline_k", 10));
  if (p.timeline_k < 1) throw SchemaError(f.pointer("timeline_k"), "timeline_k must be >= 1");
  p.context_excerpt_chars = static_cast<int>(f.integer("context_excerpt_chars", 600));
  if (const Json* e = f.raw("embedding")) {
    Fields ef(*e, f.pointer("embedding"));
    p.embedding.provider = ef.str("provider", "hash");
    if (p.embedding.provider != "hash" && p.embedding.provider != "http")
      throw SchemaError(ef.pointer("provider"), "unknown component '" + p.embedding.provider + "'");
    p.embedding.dim = static_cast<int>(ef.integer("dim", 256));
    if (p.embedding.dim < 1) throw SchemaError(ef.pointer("dim"), "dim must be >= 1");
    p.embedding.url = ef.str("url", "");
    p.embedding.model = ef.str("model", "");
    p.embedding.timeout_s = ef.number("timeout_s", 30.0);
    ef.finish();
    if (p.embedding.provider == "http" && p.embedding.url.empty())
      throw SchemaError(ef.pointer("url"), "http embedding provider needs a url");
  }
  f.finish();
  return p;
}

OpinionParams opinion_params(const Json* j, const std::string& pointer) {
  OpinionParams p;
  if (!j) return p;
  Fields f(*j, pointer);
  p.topology = f.str("topology", "scale_free");
  if (p.topology != "scale_free" && p.topology != "small_world" && p.topology != "random")
    throw SchemaError(f.pointer("topology"), "unknown topology '" + p.topology + "'");
  p.m = static_cast<int>(f.integer("m", 2));
  p.ring_degree = static_cast<int>(f.integer("ring_degree", 4));
  p.rewire = f.number("rewire", 0.1);
  p.p = f.number("p", 0.2);
  p.exposure = f.str("exposure", "similarity");
  if (p.exposure != "similarity" && p.exposure != "opposing" && p.exposure != "random")
    throw SchemaError(f.pointer("exposure"), "unknown exposure policy '" + p.exposure + "'");
  p.k = static_cast<int>(f.integer("k", 3));
  if (p.k < 1) throw SchemaError(f.pointer("k"), "exposure k must be >= 1");
  p.belief_min = f.number("belief_min", 1.0);
  p.belief_max = f.number("belief_max", 10.0);
  if (!(p.belief_min < p.belief_max)) throw SchemaError(f.pointer("belief_max"), "belief_max must exceed belief_min");
  p.belief_probe = f.str("belief_probe", "belief");
  p.context_excerpt_chars = static_cast<int>(f.integer("context_excerpt_chars", 600));
  f.finish();
  return p;
}

ModelSpec model_spec(const Json& j, const std::string& pointer) {
  Fields f(j, pointer);
  ModelSpec m;
  m.oracle = f.str("oracle", "scripted");
  if (m.oracle != "scripted" && m.oracle != "http")
    throw SchemaError(f.pointer("oracle"), "unknown component '" + m.oracle + "'");
  if (const Json* fx = f.raw("fixture")) m.fixture = *fx;
  m.base_url = f.str("base_url", "");
  m.model = f.str("model", "");
  m.api_key_env = f.str("api_key_env", "SOCSIM_API_KEY");
  m.temperature = f.number("temperature", 0.7);
  m.max_tokens = static_cast<int>(f.integer("max_tokens", 512));
  m.timeout_s = f.number("timeout_s", 60.0);
  m.retries = static_cast<int>(f.integer("retries", 2));
  f.finish();
  if (m.oracle == "scripted" && m.fixture.is_null())
    throw SchemaError(pointer + "/fixture", "scripted oracle needs a fixture");
  return m;
}

std::string padded_id(const std::string& prefix, int i, int count) {
  const int width = static_cast<int>(std::to_string(std::max(count - 1, 0)).size());
  std::string num = std::to_string(i);
  return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(num.size()))), '0') + num;
}

/// Returns the explicit roster entries (unmerged), or nullopt when the
/// roster depends on a scenario that is not available.
std::optional<Json> roster_entries(const Json& roster, const std::optional<Scenario>& scenario,
                                   const std::string& pointer) {
  if (roster.is_array()) return roster;
  if (roster.is_string()) {
    if (roster.get<std::string>() != "from_scenario")
      throw SchemaError(pointer, "roster must be a list, 'from_scenario', or {count, id_prefix}");
    if (!scenario) return std::nullopt;
    Json out = Json::array();
    for (const auto& a : scenario->actors) out.push_back({{"id", a.name}, {"persona", to_json(a.persona)}});
    return out;
  }
  if (roster.is_object()) {
    Fields f(roster, pointer);
    const int count = static_cast<int>(f.require_integer("count"));
    const std::string prefix = f.str("id_prefix", "agent_");
    f.finish();
    if (count < 1) throw SchemaError(pointer + "/count", "count must be >= 1");
    Json out = Json::array();
    for (int i = 0; i < count; ++i) out.push_back({{"id", padded_id(prefix, i, count)}});
    return out;
  }
  throw SchemaError(pointer, "roster must be a list, 'from_scenario', or {count, id_prefix}");
}

Json agents_defaults(const Json& agents) {
  if (agents.is_object() && agents.contains("defaults") && !agents["defaults"].is_null())
    return agents["defaults"];
  return Json::object();
}

std::vector<AgentSpec> build_agents(const Json& agents, const std::optional<Scenario>& scenario,
                                    bool* deferred) {
  *deferred = false;
  if (agents.is_null()) return {};
  Json roster;
  Json defaults = Json::object();
  std::string roster_ptr = "/agents";
  if (agents.is_array()) {
    roster = agents;
  } else {
    Fields f(agents, "/agents");
    if (const Json* d = f.raw("defaults")) {
      if (!d->is_object()) throw SchemaError("/agents/defaults", "expected a mapping");
      defaults = *d;
    }
    const Json* r = f.raw("roster");
    if (!r) throw SchemaError("/agents/roster", "missing required field 'roster'");
    roster = *r;
    roster_ptr = "/agents/roster";
    f.finish();
  }
  auto entries = roster_entries(roster, scenario, roster_ptr);
  if (!entries) {
    *deferred = true;
    return {};
  }
  std::vector<AgentSpec> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const auto ptr = roster_ptr + "/" + std::to_string(i);
    if (!(*entries)[i].is_object()) throw SchemaError(ptr, "expected a mapping");
    Json merged = deep_merge(defaults, (*entries)[i]);
    // persona falls back to the scenario actor of the same name
    if (!merged.contains("persona") && scenario && merged.contains("id")) {
      for (const auto& a : scenario->actors)
        if (merged["id"].is_string() && a.name == merged["id"].get<std::string>())
          merged["persona"] = to_json(a.persona);
    }
    auto spec = agent_spec_from_json(merged, ptr);
    if (!ids.insert(spec.id).second) throw SchemaError(ptr + "/id", "duplicate agent id '" + spec.id + "'");
    out.push_back(std::move(spec));
  }
  return out;
}

Overrides overrides_from_json(const Json* j, const std::string& pointer) {
  Overrides out;
  if (!j) return out;
  if (j->is_object()) {
    for (const auto& [k, v] : j->items()) out.emplace_back(k, v);
  } else if (j->is_array()) {
    for (const auto& pair : *j) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string())
        throw SchemaError(pointer, "override entries must be [key, value] pairs");
      out.emplace_back(pair[0].get<std::string>(), pair[1]);
    }
  } else {
    throw SchemaError(pointer, "overrides must be a mapping");
  }
  for (const auto& [k, _] : out) split_key_path(k);
  return out;
}

Json overrides_to_json(const Overrides& o) {
  Json arr = Json::array();
  for (const auto& [k, v] : o) arr.push_back(Json::array({k, v}));
  return arr;
}

Json params_json(const EnvironmentSpec& e) {
  if (e.component == "twitter_like") {
    const auto& p = e.social;
    Json emb{{"provider", p.embedding.provider}, {"dim", p.embedding.dim}, {"timeout_s", p.embedding.timeout_s}};
    if (!p.embedding.url.empty()) emb["url"] = p.embedding.url;
    if (!p.embedding.model.empty()) emb["model"] = p.embedding.model;
    return {{"timeline", p.timeline},
            {"timeline_k", p.timeline_k},
            {"embedding", emb},
            {"context_excerpt_chars", p.context_excerpt_chars}};
  }
  const auto& p = e.opinion;
  return {{"topology", p.topology}, {"m", p.m},
          {"ring_degree", p.ring_degree}, {"rewire", p.rewire},
          {"p", p.p}, {"exposure", p.exposure},
          {"k", p.k}, {"belief_min", p.belief_min},
          {"belief_max", p.belief_max}, {"belief_probe", p.belief_probe},
          {"context_excerpt_chars", p.context_excerpt_chars}};
}

// Adds every defaulted field so that overrides can address it.
void fill_defaults(Json& tree, const SimulationConfig& c) {
  if (!tree.contains("simulation") || tree["simulation"].is_null()) tree["simulation"] = Json::object();
  auto& sim = tree["simulation"];
  if (!sim.contains("name")) sim["name"] = c.name;
  if (!sim.contains("engine")) sim["engine"] = c.engine.component;
  if (!sim.contains("execution") || sim["execution"].is_null()) sim["execution"] = Json::object();
  const Json engine = to_json(c.engine);
  for (const auto& [k, v] : engine.items())
    if (!sim["execution"].contains(k)) sim["execution"][k] = v;

  auto& env = tree["environment"];
  if (!env.contains("params") || env["params"].is_null()) env["params"] = Json::object();
  env["params"] = deep_merge(params_json(c.environment), env["params"]);

  if (!tree.contains("evaluation") || tree["evaluation"].is_null()) tree["evaluation"] = Json::object();
  auto& ev = tree["evaluation"];
  Json probes = Json::array();
  for (const auto& p : c.evaluation.probes) probes.push_back(to_json(p));
  ev["probes"] = probes;
  ev["metrics"] = c.evaluation.metrics;
  Json stance{{"provider", c.evaluation.stance.provider}, {"claim", c.evaluation.stance.claim}};
  if (!c.evaluation.stance.url.empty()) stance["url"] = c.evaluation.stance.url;
  ev["stance"] = deep_merge(stance, ev.value("stance", Json::object()));
}

Scenario load_scenario_ref(const std::string& ref, const std::string& base_dir) {
  return load_scenario_file(find_scenario_file(ref, {base_dir, (fs::path(base_dir) / "scenarios").string()}));
}

}  // namespace

SimulationConfig config_from_tree(const Json& tree, const std::string& base_dir) {
  SimulationConfig c;
  c.tree = tree;
  c.base_dir = base_dir;
  Fields root(tree, "");

  if (const Json* sim = root.raw("simulation")) {
    Fields sf(*sim, "/simulation");
    c.name = sf.str("name", "simulation");
    if (sf.has("seed")) {
      const auto s = sf.integer("seed", 0);
      if (s < 0) throw SchemaError("/simulation/seed", "seed must be an unsigned integer");
      c.seed = static_cast<std::uint64_t>(s);
    }
    const auto engine = sf.str("engine", "simultaneous");
    if (!is_engine_component(engine))
      throw SchemaError("/simulation/engine", "unknown component '" + engine + "'");
    const Json* exec = sf.raw("execution");
    c.engine = engine_config_from_json(engine, exec ? *exec : Json(nullptr), "/simulation/execution");
    sf.finish();
  }

  const Json* env = root.raw("environment");
  if (!env) throw SchemaError("/environment", "missing required field 'environment'");
  {
    Fields ef(*env, "/environment");
    c.environment.component = ef.require_str("component");
    if (!contains(environment_components(), c.environment.component))
      throw SchemaError("/environment/component", "unknown component '" + c.environment.component + "'");
    const Json* params = ef.raw("params");
    if (c.environment.component == "twitter_like")
      c.environment.social = social_params(params, "/environment/params");
    else
      c.environment.opinion = opinion_params(params, "/environment/params");
    ef.finish();
  }

  if (const Json* sc = root.raw("scenario")) {
    if (sc->is_string()) {
      c.scenario_ref = sc->get<std::string>();
      try {
        c.scenario = load_scenario_ref(c.scenario_ref, base_dir);
      } catch (const ConfigError&) {
        // deferred: the reference may only be resolvable at run time
      }
    } else {
      c.scenario = scenario_from_json(*sc, "/scenario");
    }
  }

  if (const Json* models = root.raw("models")) {
    if (!models->is_object()) throw SchemaError("/models", "expected a mapping");
    for (const auto& [name, m] : models->items()) c.models[name] = model_spec(m, "/models/" + name);
  }

  bool deferred = false;
  if (const Json* agents = root.raw("agents")) c.agents = build_agents(*agents, c.scenario, &deferred);
  for (std::size_t i = 0; i < c.agents.size(); ++i)
    if (!c.models.count(c.agents[i].model))
      throw SchemaError("/agents", "unknown model ref '" + c.agents[i].model + "' for agent '" + c.agents[i].id + "'");

  if (const Json* ev = root.raw("evaluation")) {
    Fields vf(*ev, "/evaluation");
    if (const Json* probes = vf.raw("probes")) {
      if (!probes->is_array()) throw SchemaError("/evaluation/probes", "expected a list");
      for (std::size_t i = 0; i < probes->size(); ++i)
        c.evaluation.probes.push_back(probe_from_json((*probes)[i], "/evaluation/probes/" + std::to_string(i)));
    }
    if (const Json* metrics = vf.raw("metrics")) {
      if (!metrics->is_array()) throw SchemaError("/evaluation/metrics", "expected a list");
      for (std::size_t i = 0; i < metrics->size(); ++i) {
        const auto name = (*metrics)[i].is_string() ? (*metrics)[i].get<std::string>() : (*metrics)[i].dump();
        if (!contains(metric_names(), name))
          throw SchemaError("/evaluation/metrics/" + std::to_string(i), "unknown component '" + name + "'");
        c.evaluation.metrics.push_back(name);
      }
    }
    if (const Json* st = vf.raw("stance")) {
      Fields tf(*st, "/evaluation/stance");
      c.evaluation.stance.provider = tf.str("provider", "lexicon");
      if (c.evaluation.stance.provider != "lexicon" && c.evaluation.stance.provider != "http")
        throw SchemaError("/evaluation/stance/provider", "unknown component '" + c.evaluation.stance.provider + "'");
      c.evaluation.stance.url = tf.str("url", "");
      c.evaluation.stance.claim = tf.str("claim", "");
      tf.finish();
    }
    vf.finish();
  }
  if (c.evaluation.metrics.empty()) {
    if (c.environment.component == "twitter_like")
      c.evaluation.metrics = {"ttr", "opener_variety", "inter_agent_distinctiveness", "probe_diversity", "stance",
                              "engagement"};
    else
      c.evaluation.metrics = {"polarization", "global_disagreement", "nci", "volatility", "engagement"};
  }
  if (c.environment.component == "opinion_graph") {
    const auto& id = c.environment.opinion.belief_probe;
    const bool present = std::any_of(c.evaluation.probes.begin(), c.evaluation.probes.end(),
                                     [&](const Probe& p) { return p.id == id; });
    if (!present) {
      auto it = builtin_probes().find(id);
      if (it == builtin_probes().end())
        throw SchemaError("/environment/params/belief_probe", "belief probe '" + id + "' is not declared");
      c.evaluation.probes.push_back(it->second);
    }
  }

  c.overrides = overrides_from_json(root.raw("overrides"), "/overrides");
  if (const Json* inv = root.raw("invocation"))
    if (!inv->is_object()) throw SchemaError("/invocation", "expected a mapping");
  root.finish();
  return c;
}

SimulationConfig parse_config(std::string_view text, const std::string& base_dir) {
  const auto doc = parse_yaml(text);
  if (!doc.tree.is_object()) throw ConfigError("configuration document must be a mapping", 1, 1);
  try {
    return config_from_tree(Json(doc.tree), base_dir);
  } catch (const SchemaError& e) {
    const auto pos = doc.position_of(e.pointer());
    throw ConfigError(e.message() + (e.pointer().empty() ? "" : " at " + e.pointer()), pos.line, pos.column);
  }
}

SimulationConfig load_config_file(const std::string& path) {
  const auto dir = fs::path(path).parent_path().string();
  try {
    return parse_config(read_text_file(path), dir.empty() ? "." : dir);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

void inline_refs(Json& tree, const std::string& base_dir) {
  if (tree.contains("scenario") && tree["scenario"].is_string())
    tree["scenario"] = to_json(load_scenario_ref(tree["scenario"].get<std::string>(), base_dir));
  if (tree.contains("models") && tree["models"].is_object()) {
    for (auto& [name, m] : tree["models"].items()) {
      if (m.is_object() && m.contains("fixture") && m["fixture"].is_string()) {
        fs::path p = m["fixture"].get<std::string>();
        if (p.is_relative() && !fs::exists(p)) p = fs::path(base_dir) / p;
        m["fixture"] = Json(load_yaml_file(p.string()).tree);
      }
    }
  }
}

void apply_override(Json& tree, const std::string& key, const Json& value) {
  if (key == "model") {
    bool any = false;
    if (tree.contains("agents") && tree["agents"].contains("roster")) {
      for (auto& a : tree["agents"]["roster"]) {
        a["model"] = value;
        any = true;
      }
    }
    if (!any) throw ConfigError("unknown key 'model': no agents to rewrite");
    return;
  }
  if (key == "seed") {
    tree["simulation"]["seed"] = value;
    return;
  }
  if (key == "invocation") {
    tree["invocation"] = value;
    return;
  }
  // a fixture path replaces the inlined table; it is inlined again afterwards
  const auto parts = split_key_path(key);
  if (parts.size() == 3 && parts[0] == "models" && parts[2] == "fixture" && (value.is_string() || value.is_object())) {
    if (!tree.contains("models") || !tree["models"].contains(parts[1]))
      throw ConfigError("unknown key '" + key + "'");
    tree["models"][parts[1]]["fixture"] = value;
    return;
  }
  set_key_path(tree, key, value);
}

}  // namespace

ResolvedConfig resolve(const SimulationConfig& config, const Overrides& extra_overrides) {
  Json tree = config.tree;
  // the roster may come from the scenario, so a scenario override goes first
  for (const auto* ov : {&config.overrides, &extra_overrides})
    for (const auto& [k, v] : *ov)
      if (k == "scenario") tree["scenario"] = v;
  inline_refs(tree, config.base_dir);
  if (!tree.contains("scenario")) throw ConfigError("configuration names no scenario");
  const Scenario scenario = scenario_from_json(tree["scenario"], "/scenario");

  // materialize the roster
  if (tree.contains("agents") && !tree["agents"].is_null()) {
    bool deferred = false;
    const auto agents = build_agents(tree["agents"], scenario, &deferred);
    Json roster = Json::array();
    for (const auto& a : agents) roster.push_back(to_json(a));
    tree["agents"] = Json{{"defaults", agents_defaults(tree["agents"])}, {"roster", roster}};
  }

  Overrides merged = config.overrides;
  for (const auto& [k, v] : extra_overrides) {
    merged.erase(std::remove_if(merged.begin(), merged.end(), [&](const auto& e) { return e.first == k; }),
                 merged.end());
    merged.emplace_back(k, v);
  }
  fill_defaults(tree, config);

  for (const auto& [k, v] : merged)
    if (k != "scenario") apply_override(tree, k, v);
  inline_refs(tree, config.base_dir);
  tree["overrides"] = overrides_to_json(merged);
  if (!tree["simulation"].contains("seed") || tree["simulation"]["seed"].is_null())
    tree["simulation"]["seed"] = 0;

  ResolvedConfig rc;
  rc.config = config_from_tree(tree, config.base_dir);
  if (!rc.config.scenario) throw ConfigError("scenario did not resolve");
  rc.scenario = *rc.config.scenario;
  rc.seed = rc.config.seed.value_or(0);
  if (rc.config.agents.empty()) throw ConfigError("configuration defines no agents");
  for (const auto& [name, m] : rc.config.models)
    if (m.oracle == "scripted" && !m.fixture.is_object())
      throw ConfigError("scripted oracle fixture for model '" + name + "' did not resolve");
  rc.tree = std::move(tree);
  rc.digest = sha256_hex(canonical_bytes(rc.tree));
  return rc;
}

ResolvedConfig resolved_from_tree(const Json& tree) {
  return resolve(config_from_tree(tree, "."));
}

std::pair<std::string, Json> parse_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override must look like key.path=value, got '" + std::string(assignment) + "'");
  const std::string key = trim(assignment.substr(0, eq));
  split_key_path(key);
  return {key, parse_scalar(trim(assignment.substr(eq + 1)))};
}

}  // namespace socsim
