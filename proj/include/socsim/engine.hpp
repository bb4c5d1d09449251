#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "socsim/agents.hpp"
#include "socsim/config.hpp"
#include "socsim/event_log.hpp"
#include "socsim/game_master.hpp"
#include "socsim/run_artifact.hpp"

namespace socsim {

enum class BudgetVerdict { Continue, Deny, Finished };

std::string to_string(BudgetVerdict);

struct TurnState {
  int spent = 0;  // decisions taken this turn, rejections included
  bool finish_requested = false;
  bool action_pending = false;  // an intent awaits a verdict
};

/// finish ends the turn; at the bound a pending intent is denied and an idle
/// turn is finished; otherwise the turn continues.
BudgetVerdict budget_step(const BudgetPolicy& policy, const TurnState& turn);

/// Active agents for an episode, in roster order. `roster` must be sorted.
std::vector<AgentId> select_active(const ActivityPolicy& policy, const std::vector<AgentId>& roster, int episode,
                                   std::uint64_t seed);

struct EpisodeRecord {
  int episode = 0;
  std::vector<AgentId> active;
  std::map<AgentId, int> action_counts;  // committed actions
  std::map<AgentId, int> decisions;      // budget spent
  std::vector<Json> probes;
  std::vector<AgentId> commit_order;
  std::string world_digest;
};

using OracleMap = std::map<std::string, std::shared_ptr<ModelOracle>>;

struct RunResult {
  EventLog log;
  std::vector<EpisodeRecord> episodes;
  bool complete = false;
  std::string error;
  std::unique_ptr<GameMaster> world;
  std::vector<AgentState> agents;  // sorted by id
};

/// The episode loop. Agents are sorted by id; that order is the commit order.
RunResult run(const ResolvedConfig& rc, std::unique_ptr<GameMaster> world, std::vector<AgentState> agents,
              const OracleMap& oracles);

/// Builds world, agents and oracles from the resolved config, then runs.
RunResult run_simulation(const ResolvedConfig& rc);
RunResult run_simulation(const ResolvedConfig& rc, const OracleMap& oracles);

OracleMap make_oracles(const ResolvedConfig& rc);

/// Event log, transcripts and graph exports of a finished run.
RunOutputs collect_outputs(const RunResult& r);

}  // namespace socsim
