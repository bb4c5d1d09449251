#include "socsim/agent_spec.hpp"

#include <array>
#include <utility>

namespace socsim {

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::array<std::pair<const char*, E>, N>& table, const std::string& value,
             const std::string& pointer, const char* what) {
  for (const auto& [name, e] : table)
    if (value == name) return e;
  std::string allowed;
  for (const auto& [name, _] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  throw SchemaError(pointer, std::string("unknown ") + what + " '" + value + "' (expected one of: " +
                                 allowed + ")");
}

template <typename E, std::size_t N>
std::string enum_name(const std::array<std::pair<const char*, E>, N>& table, E e) {
  for (const auto& [name, v] : table)
    if (v == e) return name;
  return "?";
}

constexpr std::array<std::pair<const char*, PersonaTier>, 2> kTiers{
    {{"thin", PersonaTier::Thin}, {"rich", PersonaTier::Rich}}};
constexpr std::array<std::pair<const char*, MemoryKind>, 2> kMemory{
    {{"list", MemoryKind::List}, {"echo_short_long", MemoryKind::EchoShortLong}}};
constexpr std::array<std::pair<const char*, InterventionPreset>, 4> kInterventions{
    {{"none", InterventionPreset::None},
     {"mild", InterventionPreset::Mild},
     {"moderate", InterventionPreset::Moderate},
     {"strict", InterventionPreset::Strict}}};
constexpr std::array<std::pair<const char*, ActionPromptPreset>, 4> kActionPrompts{
    {{"none", ActionPromptPreset::None},
     {"deliberate", ActionPromptPreset::Deliberate},
     {"reactive", ActionPromptPreset::Reactive},
     {"engagement", ActionPromptPreset::Engagement}}};
constexpr std::array<std::pair<const char*, AnswerType>, 2> kAnswerTypes{
    {{"scale_1_10", AnswerType::Scale1To10}, {"yes_no", AnswerType::YesNo}}};
constexpr std::array<std::pair<const char*, ProbeSchedule>, 2> kSchedules{
    {{"per_episode", ProbeSchedule::PerEpisode}, {"terminal", ProbeSchedule::Terminal}}};

}  // namespace

const std::map<std::string, Probe>& builtin_probes() {
  static const std::map<std::string, Probe> probes = [] {
    std::map<std::string, Probe> m;
    auto add = [&](const char* id, const char* q, AnswerType t) {
      m[id] = Probe{id, q, t, ProbeSchedule::PerEpisode};
    };
    add("ai_optimism", "How optimistic do you feel about AI's overall impact on society right now?",
        AnswerType::Scale1To10);
    add("source_trust", "How much do you trust posts from accounts you don't personally know?",
        AnswerType::Scale1To10);
    add("suppressed_concerns",
        "Have you held back an opinion or concern because you worried how others would react?",
        AnswerType::YesNo);
    add("believed_claim",
        "Do you currently believe that a common household item causes serious health issues?",
        AnswerType::YesNo);
    add("shared_misinfo",
        "Have you posted or boosted content claiming a household item causes health issues?",
        AnswerType::YesNo);
    add("belief",
        "On a scale from 1 to 10, where does your current belief on the discussed topic stand?",
        AnswerType::Scale1To10);
    return m;
  }();
  return probes;
}

std::string to_string(PersonaTier v) { return enum_name(kTiers, v); }
std::string to_string(MemoryKind v) { return enum_name(kMemory, v); }
std::string to_string(InterventionPreset v) { return enum_name(kInterventions, v); }
std::string to_string(ActionPromptPreset v) { return enum_name(kActionPrompts, v); }
std::string to_string(AnswerType v) { return enum_name(kAnswerTypes, v); }
std::string to_string(ProbeSchedule v) { return enum_name(kSchedules, v); }

Json to_json(const PersonaCard& p) {
  Json j{{"name", p.name}, {"description", p.description}, {"tier", to_string(p.tier)}};
  if (p.source) j["source"] = *p.source;
  if (!p.attributes.empty()) j["attributes"] = p.attributes;
  return j;
}

Json to_json(const AgentSpec& a) {
  return Json{{"id", a.id},
              {"model", a.model},
              {"instructions", a.instructions},
              {"persona", to_json(a.persona)},
              {"memory",
               {{"kind", to_string(a.memory.kind)},
                {"window", a.memory.window},
                {"retrieve", a.memory.retrieve}}},
              {"cognition",
               {{"action_prompt", to_string(a.cognition.action_prompt)},
                {"intervention", to_string(a.cognition.intervention)},
                {"thinking", a.cognition.thinking},
                {"self_state_feedback", a.cognition.self_state_feedback}}}};
}

Json to_json(const Probe& p) {
  return Json{{"id", p.id},
              {"question", p.question},
              {"type", to_string(p.type)},
              {"schedule", to_string(p.schedule)}};
}

PersonaCard persona_from_json(const Json& j, const std::string& pointer) {
  Fields f(j, pointer);
  PersonaCard p;
  p.name = f.str("name", "");
  p.description = f.str("description", "");
  p.tier = parse_enum(kTiers, f.str("tier", "thin"), f.pointer("tier"), "persona tier");
  if (f.has("source")) p.source = f.str("source", "");
  if (const Json* attrs = f.raw("attributes")) {
    if (!attrs->is_object()) throw SchemaError(f.pointer("attributes"), "expected a mapping");
    for (const auto& [k, v] : attrs->items())
      p.attributes[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  f.finish();
  if (p.tier == PersonaTier::Thin && (!p.attributes.empty() || p.source))
    throw SchemaError(pointer, "thin persona cannot carry rich-tier fields (attributes, source)");
  return p;
}

AgentSpec agent_spec_from_json(const Json& j, const std::string& pointer) {
  Fields f(j, pointer);
  AgentSpec a;
  a.id = f.require_str("id");
  if (a.id.empty()) throw SchemaError(f.pointer("id"), "agent id must be non-empty");
  a.model = f.require_str("model");
  a.instructions = f.str("instructions", "");
  if (const Json* p = f.raw("persona")) a.persona = persona_from_json(*p, f.pointer("persona"));
  if (const Json* m = f.raw("memory")) {
    Fields mf(*m, f.pointer("memory"));
    a.memory.kind = parse_enum(kMemory, mf.str("kind", "list"), mf.pointer("kind"), "memory kind");
    a.memory.window = static_cast<int>(mf.integer("window", 5));
    a.memory.retrieve = static_cast<int>(mf.integer("retrieve", 10));
    mf.finish();
    if (a.memory.window < 1) throw SchemaError(mf.pointer("window"), "window must be >= 1");
    if (a.memory.retrieve < 0) throw SchemaError(mf.pointer("retrieve"), "retrieve must be >= 0");
  }
  if (const Json* c = f.raw("cognition")) {
    Fields cf(*c, f.pointer("cognition"));
    a.cognition.action_prompt = parse_enum(kActionPrompts, cf.str("action_prompt", "none"),
                                           cf.pointer("action_prompt"), "action prompt preset");
    a.cognition.intervention = parse_enum(kInterventions, cf.str("intervention", "none"),
                                          cf.pointer("intervention"), "intervention preset");
    a.cognition.thinking = cf.boolean("thinking", false);
    a.cognition.self_state_feedback = cf.boolean("self_state_feedback", false);
    cf.finish();
  }
  f.finish();
  if (a.persona.name.empty()) a.persona.name = a.id;
  return a;
}

Probe probe_from_json(const Json& j, const std::string& pointer) {
  if (j.is_string()) {
    const auto& lib = builtin_probes();
    auto it = lib.find(j.get<std::string>());
    if (it == lib.end()) throw SchemaError(pointer, "unknown probe '" + j.get<std::string>() + "'");
    return it->second;
  }
  Fields f(j, pointer);
  Probe p;
  p.id = f.require_str("id");
  p.question = f.require_str("question");
  p.type = parse_enum(kAnswerTypes, f.str("type", "scale_1_10"), f.pointer("type"), "answer type");
  p.schedule =
      parse_enum(kSchedules, f.str("schedule", "per_episode"), f.pointer("schedule"), "probe schedule");
  f.finish();
  return p;
}

}  // namespace socsim
