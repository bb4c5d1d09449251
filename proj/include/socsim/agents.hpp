#pragma once

#include <optional>
#include <string>
#include <vector>

#include "socsim/agent_spec.hpp"
#include "socsim/game_master.hpp"
#include "socsim/oracle.hpp"

namespace socsim {

/// Verbatim preset fragments. None returns an empty string.
const std::string& intervention_text(InterventionPreset p);
const std::string& action_goal_text(ActionPromptPreset p);

struct MemoryRecord {
  int episode = 0;
  std::string content;

  bool operator==(const MemoryRecord&) const = default;
};

struct Memory {
  MemoryConfig config;
  std::vector<MemoryRecord> records;     // list kind, append-only
  std::vector<MemoryRecord> short_term;  // echo kind
  std::string long_term;                 // echo kind
};

struct ReportedState {
  std::optional<std::string> opinion;
  std::optional<double> belief;
};

struct AgentState {
  AgentSpec spec;
  Memory memory;
  ReportedState last;
  Observation last_observation;
  std::vector<std::string> episode_actions;  // rendered own actions this episode
};

AgentState make_agent_state(const AgentSpec& spec, const std::vector<std::string>& memory_seeds);

enum class RequestKind { Action, Reasoning, Probe, Consolidate };

struct PromptRequest {
  RequestKind kind = RequestKind::Action;
  int episode = 0;
  int step = 0;
  const Probe* probe = nullptr;
  std::string reasoning;      // action prompts after a reasoning call
  std::string retry_reason;   // re-prompt after a parse failure
  const ActionSchema* schema = nullptr;
};

/// Empty unless self_state_feedback is on.
std::string render_self_state(const AgentState& state);

/// Deterministic prompt bytes for (state, observation, request).
std::string assemble_prompt(const AgentState& state, const Observation& obs, const PromptRequest& req);

/// Result of one act call. Records are appended to the caller's log buffer.
struct ActOutcome {
  enum class Status { Intent, ParseFailed, TransportFailed };
  Status status = Status::Intent;
  std::optional<IntendedAction> intent;
  std::string error;
};

/// One decision: optional reasoning completion, the action completion, and a
/// single re-prompt when the reply does not parse. Fatal oracle errors
/// propagate as OracleError.
ActOutcome act(AgentState& state, const Observation& obs, const ActionSchema& schema, ModelOracle& oracle,
               const DecodeParams& decode, int step, std::vector<Json>& records);

struct ProbeResponse {
  std::string probe_id;
  std::string raw;
  std::optional<double> value;  // scale: integer 1-10; yes/no: 1 or 0
  bool missing() const { return !value.has_value(); }
};

std::optional<int> parse_scale_answer(std::string_view text);
std::optional<bool> parse_yes_no(std::string_view text);

ProbeResponse answer_probe(AgentState& state, const Probe& probe, int episode, ModelOracle& oracle,
                           const DecodeParams& decode, std::vector<Json>& records);

/// End-of-episode memory update: list memory appends one record group; echo
/// memory appends to its short buffer and consolidates through the oracle
/// once the buffer reaches its window.
void consolidate_memory(AgentState& state, int episode, ModelOracle& oracle, const DecodeParams& decode,
                        std::vector<Json>& records);

/// Text of the memory section.
std::string render_memory(const Memory& m);

}  // namespace socsim
