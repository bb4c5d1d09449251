#include "socsim/game_master.hpp"

#include <algorithm>
#include <cstdlib>

namespace socsim {

namespace {

constexpr std::array<std::pair<ActionKind, const char*>, 5> kKinds{{{ActionKind::Post, "post"},
                                                                    {ActionKind::Repost, "repost"},
                                                                    {ActionKind::Reply, "reply"},
                                                                    {ActionKind::Like, "like"},
                                                                    {ActionKind::Finish, "finish"}}};

// Field requirements per kind: target, text.
struct Shape {
  bool target;
  bool text;
};

Shape shape_of(ActionKind k) {
  switch (k) {
    case ActionKind::Post: return {false, true};
    case ActionKind::Repost: return {true, false};
    case ActionKind::Reply: return {true, true};
    case ActionKind::Like: return {true, false};
    case ActionKind::Finish: return {false, false};
  }
  return {false, false};
}

// Returns the first balanced {...} block that parses as a JSON object.
std::optional<Json> extract_object(std::string_view s) {
  for (std::size_t start = s.find('{'); start != std::string_view::npos; start = s.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false, esc = false;
    for (std::size_t i = start; i < s.size(); ++i) {
      const char c = s[i];
      if (in_str) {
        if (esc) esc = false;
        else if (c == '\\') esc = true;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        try {
          auto j = Json::parse(s.substr(start, i - start + 1));
          if (j.is_object()) return j;
        } catch (const Json::parse_error&) {
        }
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::string to_string(ActionKind k) {
  for (const auto& [v, n] : kKinds)
    if (v == k) return n;
  return "?";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) {
  for (const auto& [v, n] : kKinds)
    if (s == n) return v;
  return std::nullopt;
}

bool ActionSchema::allows(ActionKind k) const { return std::find(kinds.begin(), kinds.end(), k) != kinds.end(); }

Json ActionSchema::document() const {
  Json kinds_json = Json::array();
  Json rules = Json::object();
  for (auto k : kinds) {
    kinds_json.push_back(to_string(k));
    const auto sh = shape_of(k);
    Json req = Json::array();
    if (sh.target) req.push_back("target");
    if (sh.text) req.push_back("text");
    rules[to_string(k)] = req;
  }
  return {{"type", "object"},
          {"required", {"kind"}},
          {"additionalProperties", false},
          {"properties",
           {{"kind", {{"enum", kinds_json}}}, {"target", {{"type", "string"}}}, {"text", {{"type", "string"}}}}},
          {"fields_by_kind", rules}};
}

ActionSchema ActionSchema::social() {
  return {{ActionKind::Post, ActionKind::Repost, ActionKind::Reply, ActionKind::Like, ActionKind::Finish}};
}

ActionSchema ActionSchema::opinion() { return {{ActionKind::Post, ActionKind::Finish}}; }

ParseResult parse_intent(std::string_view raw, const ActionSchema& schema, const AgentId& agent) {
  auto fail = [&](std::string reason) { return ParseFailure{std::move(reason), std::string(raw)}; };
  const auto obj = extract_object(raw);
  if (!obj) return fail("no JSON object found");
  for (const auto& [k, _] : obj->items())
    if (k != "kind" && k != "target" && k != "text") return fail("unknown field '" + k + "'");
  if (!obj->contains("kind") || !(*obj)["kind"].is_string()) return fail("missing field 'kind'");
  const auto kind_name = (*obj)["kind"].get<std::string>();
  const auto kind = action_kind_from_string(kind_name);
  if (!kind) return fail("unknown action kind '" + kind_name + "'");
  (void)schema;  // environment permissions are checked by validate

  IntendedAction a;
  a.agent = agent;
  a.kind = *kind;
  a.raw_model_output = std::string(raw);
  for (const char* field : {"target", "text"}) {
    if (!obj->contains(field) || (*obj)[field].is_null()) continue;
    if (!(*obj)[field].is_string()) return fail(std::string("field '") + field + "' must be a string");
    (std::string(field) == "target" ? a.target : a.text) = (*obj)[field].get<std::string>();
  }
  const auto sh = shape_of(a.kind);
  const bool has_target = a.target && !a.target->empty();
  const bool has_text = a.text && !trim(*a.text).empty();
  if (sh.target && sh.text && (!has_target || !has_text)) return fail(kind_name + " requires target and text");
  if (sh.target && !has_target) return fail(kind_name + " requires target");
  if (sh.text && !has_text) return fail(kind_name + " requires text");
  if (!sh.target && a.target) return fail(kind_name + " takes no target");
  if (!sh.text && a.text) return fail(kind_name + " takes no text");
  return a;
}

std::string render_item(const ObsItem& it) {
  if (it.belief) {
    std::string s = "[" + it.ref + "] @" + it.author + " belief=" + format_double(*it.belief);
    if (!it.text.empty()) s += ": " + it.text;
    return s;
  }
  std::string label = it.kind;
  if (it.parent) label += (it.kind == "repost" ? " of " : " to ") + *it.parent;
  return "[" + it.ref + "] @" + it.author + " (" + label + "): " + it.text;
}

std::string context_excerpt(const std::string& settings, int chars) {
  if (chars <= 0) return {};
  if (settings.size() <= static_cast<std::size_t>(chars)) return settings;
  std::size_t cut = static_cast<std::size_t>(chars);
  // do not split a UTF-8 sequence
  while (cut > 0 && (static_cast<unsigned char>(settings[cut]) & 0xC0) == 0x80) --cut;
  return settings.substr(0, cut);
}

std::vector<Json> GameMaster::after_probe(const AgentId&, const Probe&, const std::string&, int) { return {}; }

// ---------------------------------------------------------------------------

SocialGameMaster::SocialGameMaster(SocialState state, Scenario scenario, SocialParams params,
                                   std::map<AgentId, std::string> personas,
                                   std::shared_ptr<EmbeddingProvider> provider)
    : state_(std::move(state)),
      scenario_(std::move(scenario)),
      params_(std::move(params)),
      personas_(std::move(personas)),
      provider_(std::move(provider)) {}

std::unique_ptr<GameMaster> SocialGameMaster::clone() const { return std::make_unique<SocialGameMaster>(*this); }

std::vector<Json> SocialGameMaster::begin_episode(int episode) {
  const auto before = state_.posts().size();
  publish_context(state_, scenario_, episode);
  std::vector<Json> out;
  for (auto i = before; i < state_.posts().size(); ++i) {
    const auto& p = state_.posts()[i];
    out.push_back({{"type", "context"}, {"episode", episode}, {"post_id", p.id}, {"author", p.author},
                   {"text", p.text}, {"text_digest", short_digest(p.text)}});
  }
  return out;
}

Observation SocialGameMaster::observe(const AgentId& agent, int episode, int remaining_budget) const {
  Observation o;
  o.agent = agent;
  o.episode = episode;
  o.remaining_budget = std::max(0, remaining_budget);
  o.context_excerpt = context_excerpt(scenario_.settings, params_.context_excerpt_chars);
  std::vector<Post> posts;
  try {
    if (params_.timeline == "recommender") {
      const auto it = personas_.find(agent);
      posts = timeline_recommender(state_, agent, params_.timeline_k, *provider_,
                                   it == personas_.end() ? std::string() : it->second);
    } else {
      posts = timeline_chronological(state_, agent, params_.timeline_k);
    }
  } catch (const std::exception& e) {
    o.notes.push_back({{"type", "timeline_error"}, {"episode", episode}, {"agent", agent},
                       {"message", e.what()}, {"fallback", "chronological"}});
    try {
      posts = timeline_chronological(state_, agent, params_.timeline_k);
    } catch (const std::exception&) {
      o.error = true;
    }
  }
  for (const auto& p : posts)
    o.items.push_back({p.id, p.author, to_string(p.kind), p.parent_id, state_.display_text(p), std::nullopt});
  return o;
}

ResolvedAction SocialGameMaster::validate(const IntendedAction& intent, int remaining_budget,
                                          const TurnScratch& scratch) const {
  ResolvedAction r{intent, false, {}};
  if (!schema_.allows(intent.kind)) {
    r.reason = "kind not allowed";
    return r;
  }
  if (intent.kind == ActionKind::Finish) {
    r.accepted = true;
    return r;
  }
  if (remaining_budget <= 0) {
    r.reason = "budget exhausted";
    return r;
  }
  if (intent.target) {
    if (!state_.find(*intent.target)) {
      r.reason = "unknown target";
      return r;
    }
    if (intent.kind == ActionKind::Like &&
        (state_.liked(intent.agent, *intent.target) || scratch.pending_likes.count(*intent.target))) {
      r.reason = "duplicate like";
      return r;
    }
  }
  r.accepted = true;
  return r;
}

Json SocialGameMaster::commit(const IntendedAction& intent, int episode) {
  SocialAction a;
  a.agent = intent.agent;
  a.target = intent.target;
  a.text = intent.text.value_or("");
  a.episode = episode;
  switch (intent.kind) {
    case ActionKind::Post: a.kind = SocialActionKind::Post; break;
    case ActionKind::Repost: a.kind = SocialActionKind::Repost; break;
    case ActionKind::Reply: a.kind = SocialActionKind::Reply; break;
    case ActionKind::Like: a.kind = SocialActionKind::Like; break;
    case ActionKind::Finish: throw SimulationError("finish is never committed");
  }
  return apply_action(state_, a).second;
}

Json SocialGameMaster::init_record() const {
  Json follows = Json::array();
  for (const auto& [a, b] : state_.follow_edges()) follows.push_back({a, b});
  Json history = Json::array();
  for (const auto& p : state_.posts()) history.push_back({{"post_id", p.id}, {"author", p.author}, {"text", p.text}});
  return {{"type", "world_init"}, {"environment", "twitter_like"}, {"agents", state_.agents()},
          {"streams", state_.streams()}, {"follows", follows}, {"history", history},
          {"digest", state_.digest()}};
}

std::map<std::string, std::string> SocialGameMaster::exports() const {
  std::string follows;
  for (const auto& [a, b] : state_.follow_edges()) follows += a + " " + b + "\n";
  std::string posts = "post_id,author,kind,parent_id,episode,like_count\n";
  for (const auto& p : state_.posts())
    posts += p.id + "," + p.author + "," + to_string(p.kind) + "," + p.parent_id.value_or("") + "," +
             std::to_string(p.episode) + "," + std::to_string(p.like_count) + "\n";
  return {{"graph/follows.txt", follows}, {"graph/posts.csv", posts}};
}

// ---------------------------------------------------------------------------

OpinionGameMaster::OpinionGameMaster(BeliefGraph graph, Scenario scenario, OpinionParams params, std::uint64_t seed)
    : graph_(std::move(graph)), scenario_(std::move(scenario)), params_(std::move(params)), seed_(seed) {
  trajectory_.snapshots.push_back(graph_.beliefs);
}

std::unique_ptr<GameMaster> OpinionGameMaster::clone() const { return std::make_unique<OpinionGameMaster>(*this); }

std::vector<Json> OpinionGameMaster::begin_episode(int) { return {}; }

Observation OpinionGameMaster::observe(const AgentId& agent, int episode, int remaining_budget) const {
  Observation o;
  o.agent = agent;
  o.episode = episode;
  o.remaining_budget = std::max(0, remaining_budget);
  o.context_excerpt = context_excerpt(scenario_.settings, params_.context_excerpt_chars);
  const int node = graph_.index_of(agent);
  if (node < 0) {
    o.error = true;
    return o;
  }
  const auto picked = select_exposure(graph_, node, exposure_from_string(params_.exposure), params_.k,
                                      derive_seed(seed_, {fnv1a64("exposure"), static_cast<std::uint64_t>(episode),
                                                          fnv1a64(agent)}));
  for (int nb : picked) {
    const auto& id = graph_.ids[static_cast<std::size_t>(nb)];
    auto it = opinions_.find(id);
    o.items.push_back({id, id, "opinion", std::nullopt, it == opinions_.end() ? std::string() : it->second,
                       graph_.beliefs[nb]});
  }
  return o;
}

ResolvedAction OpinionGameMaster::validate(const IntendedAction& intent, int remaining_budget,
                                           const TurnScratch&) const {
  ResolvedAction r{intent, false, {}};
  if (!schema_.allows(intent.kind)) r.reason = "kind not allowed";
  else if (intent.kind != ActionKind::Finish && remaining_budget <= 0) r.reason = "budget exhausted";
  else r.accepted = true;
  return r;
}

Json OpinionGameMaster::commit(const IntendedAction& intent, int episode) {
  const auto text = intent.text.value_or("");
  opinions_[intent.agent] = text;
  return {{"type", "action"}, {"episode", episode}, {"agent", intent.agent}, {"kind", "post"},
          {"post_id", nullptr}, {"parent_id", nullptr}, {"text", text}, {"text_digest", short_digest(text)}};
}

std::vector<Json> OpinionGameMaster::after_probe(const AgentId& agent, const Probe& probe,
                                                 const std::string& raw_answer, int episode) {
  if (probe.id != params_.belief_probe) return {};
  const int node = graph_.index_of(agent);
  if (node < 0) return {};
  const auto v = parse_belief(raw_answer);
  if (!v)
    return {{{"type", "parse_failure"}, {"episode", episode}, {"agent", agent}, {"stage", "belief"},
             {"reason", "no number in belief answer"}, {"raw", raw_answer}}};
  const auto u = set_belief(graph_, node, *v);
  trajectory_.steps.push_back({episode, node, u.delta});
  Json rec{{"type", "belief"}, {"episode", episode}, {"agent", agent}, {"old", u.old_value},
           {"value", u.value}, {"delta", u.delta}, {"clamped", u.clamped}};
  if (u.clamped) rec["requested"] = *v;
  return {rec};
}

void OpinionGameMaster::end_episode(int) { trajectory_.snapshots.push_back(graph_.beliefs); }

Json OpinionGameMaster::init_record() const {
  Json edges = Json::array();
  for (const auto& [u, v] : graph_.graph.edges)
    edges.push_back({graph_.ids[static_cast<std::size_t>(u)], graph_.ids[static_cast<std::size_t>(v)]});
  std::vector<double> beliefs(graph_.beliefs.data(), graph_.beliefs.data() + graph_.beliefs.size());
  return {{"type", "world_init"}, {"environment", "opinion_graph"}, {"topology", to_string(graph_.kind)},
          {"agents", graph_.ids}, {"edges", edges}, {"beliefs", beliefs},
          {"b_min", graph_.b_min}, {"b_max", graph_.b_max}, {"digest", digest()}};
}

std::map<std::string, std::string> OpinionGameMaster::exports() const {
  return {{"graph/edges.txt", edge_list_text(graph_.graph, graph_.ids)},
          {"graph/beliefs.csv", beliefs_csv(trajectory_, graph_.ids)}};
}

std::string OpinionGameMaster::digest() const {
  Json edges = Json::array();
  for (const auto& [u, v] : graph_.graph.edges) edges.push_back({u, v});
  Json beliefs = Json::array();
  for (Eigen::Index i = 0; i < graph_.beliefs.size(); ++i) beliefs.push_back(graph_.beliefs[i]);
  return sha256_hex(canonical_bytes(Json{{"edges", edges}, {"beliefs", beliefs}, {"opinions", opinions_}}));
}

// ---------------------------------------------------------------------------

std::unique_ptr<GameMaster> make_game_master(const ResolvedConfig& rc) {
  std::vector<AgentId> ids;
  for (const auto& a : rc.config.agents) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  const auto& scn = rc.scenario;
  const auto world_seed = scn.initialization.seed.value_or(rc.seed);

  if (rc.config.environment.component == "twitter_like") {
    const auto& params = rc.config.environment.social;
    std::map<AgentId, std::string> personas;
    for (const auto& a : rc.config.agents)
      personas[a.id] = a.persona.name + ": " + a.persona.description;
    std::shared_ptr<EmbeddingProvider> provider;
    if (params.embedding.provider == "http") {
      const char* key = std::getenv("SOCSIM_API_KEY");
      provider = std::make_shared<HttpEmbedding>(params.embedding.url, params.embedding.model,
                                                 params.embedding.timeout_s, key ? key : "");
    } else {
      provider = std::make_shared<HashEmbedding>(params.embedding.dim);
    }
    return std::make_unique<SocialGameMaster>(seed_social_state(scn, ids, world_seed), scn, params, personas,
                                              provider);
  }

  const auto& params = rc.config.environment.opinion;
  const int n = static_cast<int>(ids.size());
  GraphParams gp{params.m, params.ring_degree, params.rewire, params.p};
  BeliefGraph g;
  g.kind = topology_from_string(params.topology);
  g.graph = generate_graph(g.kind, n, gp, world_seed);
  g.ids = ids;
  g.b_min = params.belief_min;
  g.b_max = params.belief_max;
  g.beliefs = Eigen::VectorXd(n);
  const auto& init = scn.initialization.beliefs;
  if (!init.empty()) {
    if (static_cast<int>(init.size()) != n)
      throw ConfigError("scenario lists " + std::to_string(init.size()) + " initial beliefs for " +
                        std::to_string(n) + " agents");
    // actor order when actors name the agents, roster order otherwise
    std::map<std::string, double> by_actor;
    for (std::size_t i = 0; i < scn.actors.size() && i < init.size(); ++i) by_actor[scn.actors[i].name] = init[i];
    for (int i = 0; i < n; ++i) {
      auto it = by_actor.find(ids[static_cast<std::size_t>(i)]);
      g.beliefs[i] = std::clamp(it != by_actor.end() ? it->second : init[static_cast<std::size_t>(i)], g.b_min,
                                g.b_max);
    }
  } else {
    Rng rng(derive_seed(world_seed, {fnv1a64("beliefs")}));
    for (int i = 0; i < n; ++i) g.beliefs[i] = g.b_min + (g.b_max - g.b_min) * rng.uniform();
  }
  return std::make_unique<OpinionGameMaster>(std::move(g), scn, params, rc.seed);
}

}  // namespace socsim
