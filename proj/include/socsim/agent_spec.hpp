#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/common.hpp"
#include "socsim/document.hpp"

namespace socsim {

enum class PersonaTier { Thin, Rich };

/// Thin personas carry a name and description; rich personas extend them with
/// free-form attributes and an optional source dataset tag.
struct PersonaCard {
  std::string name;
  std::string description;
  PersonaTier tier = PersonaTier::Thin;
  std::optional<std::string> source;
  std::map<std::string, std::string> attributes;

  bool operator==(const PersonaCard&) const = default;
};

enum class MemoryKind { List, EchoShortLong };

struct MemoryConfig {
  MemoryKind kind = MemoryKind::List;
  int window = 5;     // echo short-term buffer size
  int retrieve = 10;  // list records rendered into prompts

  bool operator==(const MemoryConfig&) const = default;
};

enum class InterventionPreset { None, Mild, Moderate, Strict };
enum class ActionPromptPreset { None, Deliberate, Reactive, Engagement };

struct Cognition {
  ActionPromptPreset action_prompt = ActionPromptPreset::None;
  InterventionPreset intervention = InterventionPreset::None;
  bool thinking = false;
  bool self_state_feedback = false;

  bool operator==(const Cognition&) const = default;
};

struct AgentSpec {
  AgentId id;
  std::string model;
  std::string instructions;
  PersonaCard persona;
  MemoryConfig memory;
  Cognition cognition;

  bool operator==(const AgentSpec&) const = default;
};

enum class AnswerType { Scale1To10, YesNo };
enum class ProbeSchedule { PerEpisode, Terminal };

struct Probe {
  std::string id;
  std::string question;
  AnswerType type = AnswerType::Scale1To10;
  ProbeSchedule schedule = ProbeSchedule::PerEpisode;

  bool operator==(const Probe&) const = default;
};

/// Built-in probe library (ids: ai_optimism, source_trust,
/// suppressed_concerns, believed_claim, shared_misinfo, belief).
const std::map<std::string, Probe>& builtin_probes();

std::string to_string(PersonaTier);
std::string to_string(MemoryKind);
std::string to_string(InterventionPreset);
std::string to_string(ActionPromptPreset);
std::string to_string(AnswerType);
std::string to_string(ProbeSchedule);

Json to_json(const PersonaCard&);
Json to_json(const AgentSpec&);
Json to_json(const Probe&);

PersonaCard persona_from_json(const Json&, const std::string& pointer);
AgentSpec agent_spec_from_json(const Json&, const std::string& pointer);
Probe probe_from_json(const Json&, const std::string& pointer);

}  // namespace socsim
