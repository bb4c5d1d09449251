#include "socsim/engine_config.hpp"

namespace socsim {

Dynamics default_dynamics(const std::string& component) {
  if (component == "simultaneous") return Dynamics::Parallel;
  if (component == "synchronous") return Dynamics::Synchronous;
  if (component == "sequential") return Dynamics::Sequential;
  throw ConfigError("unknown engine component '" + component + "'");
}

bool is_engine_component(const std::string& name) {
  return name == "simultaneous" || name == "synchronous" || name == "sequential";
}

std::string to_string(Dynamics d) {
  switch (d) {
    case Dynamics::Sequential: return "sequential";
    case Dynamics::Synchronous: return "synchronous";
    case Dynamics::Parallel: return "parallel";
  }
  return "?";
}

std::string to_string(BudgetPolicy::Kind k) {
  switch (k) {
    case BudgetPolicy::Kind::Single: return "single";
    case BudgetPolicy::Kind::Fixed: return "fixed";
    case BudgetPolicy::Kind::AgentDecided: return "agent_decided";
  }
  return "?";
}

Json to_json(const EngineConfig& e) {
  Json budget{{"policy", to_string(e.budget.kind)}};
  if (e.budget.kind == BudgetPolicy::Kind::Fixed) budget["n"] = e.budget.n;
  if (e.budget.kind == BudgetPolicy::Kind::AgentDecided) budget["cap"] = e.budget.n;

  Json activity;
  switch (e.activity.kind) {
    case ActivityPolicy::Kind::All: activity["policy"] = "all"; break;
    case ActivityPolicy::Kind::FixedFraction:
      activity["policy"] = "fixed_fraction";
      activity["fraction"] = e.activity.fraction;
      break;
    case ActivityPolicy::Kind::Scheduled:
      activity["policy"] = "scheduled";
      activity["schedule"] = e.activity.schedule;
      break;
  }
  if (e.activity.seed) activity["seed"] = *e.activity.seed;

  Json j{{"max_steps", e.max_steps},
         {"dynamics", to_string(e.dynamics)},
         {"parallelism", e.parallelism},
         {"budget", budget},
         {"activity", activity}};
  if (e.abort_at_episode) j["abort_at_episode"] = *e.abort_at_episode;
  return j;
}

EngineConfig engine_config_from_json(const std::string& component, const Json& execution,
                                     const std::string& pointer) {
  EngineConfig e;
  if (!is_engine_component(component))
    throw SchemaError("/simulation/engine", "unknown component '" + component + "'");
  e.component = component;
  e.dynamics = default_dynamics(component);
  if (execution.is_null()) return e;

  Fields f(execution, pointer);
  e.max_steps = static_cast<int>(f.integer("max_steps", 10));
  if (e.max_steps < 1) throw SchemaError(f.pointer("max_steps"), "max_steps must be >= 1");
  if (f.has("dynamics")) {
    const auto d = f.str("dynamics", "");
    if (d == "sequential") e.dynamics = Dynamics::Sequential;
    else if (d == "synchronous") e.dynamics = Dynamics::Synchronous;
    else if (d == "parallel") e.dynamics = Dynamics::Parallel;
    else throw SchemaError(f.pointer("dynamics"), "unknown dynamics '" + d + "'");
  }
  e.parallelism = static_cast<int>(f.integer("parallelism", 4));
  if (e.parallelism < 1) throw SchemaError(f.pointer("parallelism"), "parallelism must be >= 1");

  if (const Json* b = f.raw("budget")) {
    Fields bf(*b, f.pointer("budget"));
    const auto policy = bf.str("policy", "single");
    if (policy == "single") {
      e.budget = BudgetPolicy::single();
    } else if (policy == "fixed") {
      e.budget = BudgetPolicy::fixed(static_cast<int>(bf.require_integer("n")));
      if (e.budget.n < 1) throw SchemaError(bf.pointer("n"), "fixed budget n must be >= 1");
    } else if (policy == "agent_decided") {
      e.budget = BudgetPolicy::agent_decided(static_cast<int>(bf.require_integer("cap")));
      if (e.budget.n < 1) throw SchemaError(bf.pointer("cap"), "cap must be >= 1");
    } else {
      throw SchemaError(bf.pointer("policy"), "unknown budget policy '" + policy + "'");
    }
    bf.finish();
  }

  if (const Json* a = f.raw("activity")) {
    Fields af(*a, f.pointer("activity"));
    const auto policy = af.str("policy", "all");
    if (policy == "all") {
      e.activity.kind = ActivityPolicy::Kind::All;
    } else if (policy == "fixed_fraction") {
      e.activity.kind = ActivityPolicy::Kind::FixedFraction;
      e.activity.fraction = af.number("fraction", 1.0);
      if (!(e.activity.fraction > 0.0 && e.activity.fraction <= 1.0))
        throw SchemaError(af.pointer("fraction"), "fraction must satisfy 0 < f <= 1");
    } else if (policy == "scheduled") {
      e.activity.kind = ActivityPolicy::Kind::Scheduled;
      const Json* s = af.raw("schedule");
      if (!s || !s->is_array()) throw SchemaError(af.pointer("schedule"), "scheduled policy needs a list");
      for (const auto& ep : *s) {
        if (!ep.is_array()) throw SchemaError(af.pointer("schedule"), "each schedule entry must be a list");
        std::vector<AgentId> ids;
        for (const auto& id : ep) ids.push_back(id.is_string() ? id.get<std::string>() : id.dump());
        e.activity.schedule.push_back(std::move(ids));
      }
    } else {
      throw SchemaError(af.pointer("policy"), "unknown activity policy '" + policy + "'");
    }
    if (af.has("seed")) e.activity.seed = static_cast<std::uint64_t>(af.integer("seed", 0));
    af.finish();
  }
  if (f.has("abort_at_episode")) e.abort_at_episode = static_cast<int>(f.integer("abort_at_episode", 0));
  f.finish();
  return e;
}

}  // namespace socsim
