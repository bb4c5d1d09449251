#include "socsim/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>

namespace socsim {

namespace {

ContextItem context_item_from_json(const Json& j, const std::string& pointer) {
  Fields f(j, pointer);
  ContextItem c;
  c.author = f.require_str("author");
  c.text = f.require_str("text");
  c.episode = static_cast<int>(f.integer("episode", 0));
  f.finish();
  if (c.episode < 0) throw SchemaError(pointer + "/episode", "episode must be >= 0");
  return c;
}

Json to_json(const ContextItem& c) {
  Json j{{"author", c.author}, {"text", c.text}};
  if (c.episode != 0) j["episode"] = c.episode;
  return j;
}

}  // namespace

Scenario scenario_from_json(const Json& j, const std::string& pointer) {
  Fields f(j, pointer);
  Scenario s;
  s.name = f.require_str("name");
  s.settings = f.str("settings", "");
  s.claim = f.str("claim", "");
  if (const Json* actors = f.raw("actors")) {
    if (!actors->is_array()) throw SchemaError(f.pointer("actors"), "expected a list");
    for (std::size_t i = 0; i < actors->size(); ++i) {
      const auto ptr = f.pointer("actors") + "/" + std::to_string(i);
      Fields af((*actors)[i], ptr);
      ActorSeed a;
      a.name = af.require_str("name");
      a.role = af.str("role", "");
      if (const Json* p = af.raw("persona")) {
        if (p->is_string())
          a.persona.description = p->get<std::string>();
        else
          a.persona = persona_from_json(*p, af.pointer("persona"));
      }
      if (a.persona.name.empty()) a.persona.name = a.name;
      af.finish();
      s.actors.push_back(std::move(a));
    }
  }
  if (const Json* streams = f.raw("streams")) {
    if (!streams->is_array()) throw SchemaError(f.pointer("streams"), "expected a list");
    for (std::size_t i = 0; i < streams->size(); ++i) {
      Fields sf((*streams)[i], f.pointer("streams") + "/" + std::to_string(i));
      s.streams.push_back({sf.require_str("name"), sf.str("description", "")});
      sf.finish();
    }
  }
  if (const Json* ctx = f.raw("context")) {
    if (!ctx->is_array()) throw SchemaError(f.pointer("context"), "expected a list");
    for (std::size_t i = 0; i < ctx->size(); ++i)
      s.context.push_back(context_item_from_json((*ctx)[i], f.pointer("context") + "/" + std::to_string(i)));
  }
  if (const Json* init = f.raw("initialization")) {
    Fields inf(*init, f.pointer("initialization"));
    if (const Json* t = inf.raw("topology")) {
      if (!t->is_object()) throw SchemaError(inf.pointer("topology"), "expected a mapping");
      s.initialization.topology = *t;
    }
    if (const Json* ms = inf.raw("memory_seeds")) {
      if (!ms->is_object()) throw SchemaError(inf.pointer("memory_seeds"), "expected a mapping");
      for (const auto& [k, v] : ms->items()) {
        std::vector<std::string> items;
        if (v.is_string()) {
          items.push_back(v.get<std::string>());
        } else if (v.is_array()) {
          for (const auto& x : v) items.push_back(x.get<std::string>());
        } else {
          throw SchemaError(inf.pointer("memory_seeds") + "/" + k, "expected text or list of text");
        }
        s.initialization.memory_seeds[k] = std::move(items);
      }
    }
    if (const Json* h = inf.raw("history")) {
      if (!h->is_array()) throw SchemaError(inf.pointer("history"), "expected a list");
      for (std::size_t i = 0; i < h->size(); ++i)
        s.initialization.history.push_back(
            context_item_from_json((*h)[i], inf.pointer("history") + "/" + std::to_string(i)));
    }
    if (inf.has("seed")) s.initialization.seed = static_cast<std::uint64_t>(inf.integer("seed", 0));
    if (const Json* b = inf.raw("beliefs")) {
      if (!b->is_array()) throw SchemaError(inf.pointer("beliefs"), "expected a list of numbers");
      for (const auto& v : *b) {
        if (!v.is_number()) throw SchemaError(inf.pointer("beliefs"), "expected a list of numbers");
        s.initialization.beliefs.push_back(v.get<double>());
      }
    }
    inf.finish();
  }
  f.finish();
  return s;
}

Json to_json(const Scenario& s) {
  Json actors = Json::array();
  for (const auto& a : s.actors) {
    Json aj{{"name", a.name}, {"persona", to_json(a.persona)}};
    if (!a.role.empty()) aj["role"] = a.role;
    actors.push_back(aj);
  }
  Json streams = Json::array();
  for (const auto& st : s.streams) streams.push_back({{"name", st.name}, {"description", st.description}});
  Json context = Json::array();
  for (const auto& c : s.context) context.push_back(to_json(c));
  Json history = Json::array();
  for (const auto& c : s.initialization.history) history.push_back(to_json(c));
  Json init{{"topology", s.initialization.topology},
            {"memory_seeds", s.initialization.memory_seeds},
            {"history", history}};
  if (s.initialization.seed) init["seed"] = *s.initialization.seed;
  if (!s.initialization.beliefs.empty()) init["beliefs"] = s.initialization.beliefs;
  Json j{{"name", s.name},
         {"settings", s.settings},
         {"actors", actors},
         {"streams", streams},
         {"context", context},
         {"initialization", init}};
  if (!s.claim.empty()) j["claim"] = s.claim;
  return j;
}

Scenario load_scenario_file(const std::string& path) {
  const auto doc = load_yaml_file(path);
  try {
    return scenario_from_json(Json(doc.tree));
  } catch (const SchemaError& e) {
    const auto pos = doc.position_of(e.pointer());
    throw ConfigError(path + ": " + e.message() + " at " + e.pointer(), pos.line, pos.column);
  }
}

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  std::set<std::string> actors, sources;
  for (std::size_t i = 0; i < s.actors.size(); ++i) {
    const auto& name = s.actors[i].name;
    if (name.empty())
      out.push_back({"actors/" + std::to_string(i), "actor name is empty"});
    else if (!actors.insert(name).second)
      out.push_back({"actors/" + std::to_string(i), "duplicate actor name '" + name + "'"});
  }
  sources = actors;
  for (std::size_t i = 0; i < s.streams.size(); ++i) {
    const auto& name = s.streams[i].name;
    if (actors.count(name))
      out.push_back({"streams/" + std::to_string(i), "stream '" + name + "' collides with an actor name"});
    else if (!sources.insert(name).second)
      out.push_back({"streams/" + std::to_string(i), "duplicate stream name '" + name + "'"});
  }
  auto check_items = [&](const std::vector<ContextItem>& items, const std::string& where) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (!sources.count(items[i].author))
        out.push_back({where + "/" + std::to_string(i),
                       "author '" + items[i].author + "' is neither an actor nor a named stream"});
  };
  check_items(s.context, "context");
  check_items(s.initialization.history, "initialization/history");
  for (const auto& [name, _] : s.initialization.memory_seeds)
    if (!actors.count(name))
      out.push_back({"initialization/memory_seeds/" + name, "memory seed for unknown actor '" + name + "'"});
  const auto& topo = s.initialization.topology;
  const auto kind = topo.value("kind", std::string("complete"));
  if (kind != "complete" && kind != "random" && kind != "explicit" && kind != "none")
    out.push_back({"initialization/topology/kind", "unknown topology kind '" + kind + "'"});
  if (kind == "explicit" && topo.contains("edges")) {
    for (const auto& e : topo["edges"]) {
      if (!e.is_array() || e.size() != 2) {
        out.push_back({"initialization/topology/edges", "edge must be a [follower, followee] pair"});
        continue;
      }
      const auto a = e[0].get<std::string>(), b = e[1].get<std::string>();
      if (a == b) out.push_back({"initialization/topology/edges", "self-follow '" + a + "'"});
      if (!actors.count(a)) out.push_back({"initialization/topology/edges", "unknown follower '" + a + "'"});
      if (!sources.count(b)) out.push_back({"initialization/topology/edges", "unknown followee '" + b + "'"});
    }
  }
  for (double b : s.initialization.beliefs)
    if (b < 1.0 || b > 10.0) out.push_back({"initialization/beliefs", "belief outside [1, 10]"});
  return out;
}

std::string find_scenario_file(const std::string& ref, const std::vector<std::string>& search_dirs) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(ref)) return ref;
  std::vector<std::string> dirs = search_dirs;
  if (const char* env = std::getenv("SOCSIM_SCENARIO_PATH")) {
    std::string all = env, cur;
    for (char c : all + ":") {
      if (c == ':') {
        if (!cur.empty()) dirs.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
#ifdef SOCSIM_DATA_DIR
  dirs.push_back(std::string(SOCSIM_DATA_DIR) + "/scenarios");
#endif
  for (const auto& d : dirs) {
    for (const auto& candidate : {fs::path(d) / ref, fs::path(d) / (ref + ".yaml"),
                                  fs::path(d) / "scenarios" / (ref + ".yaml")}) {
      if (fs::is_regular_file(candidate)) return candidate.string();
    }
  }
  throw ConfigError("unknown scenario '" + ref + "'");
}

}  // namespace socsim
