#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "socsim/common.hpp"
#include "socsim/document.hpp"

namespace socsim {

enum class Dynamics { Sequential, Synchronous, Parallel };

struct BudgetPolicy {
  enum class Kind { Single, Fixed, AgentDecided };
  Kind kind = Kind::Single;
  int n = 1;  // fixed count, or the cap for AgentDecided

  static BudgetPolicy single() { return {Kind::Single, 1}; }
  static BudgetPolicy fixed(int n) { return {Kind::Fixed, n}; }
  static BudgetPolicy agent_decided(int cap) { return {Kind::AgentDecided, cap}; }

  /// Upper bound on budget spent per agent per episode.
  int bound() const { return kind == Kind::Single ? 1 : n; }

  bool operator==(const BudgetPolicy&) const = default;
};

struct ActivityPolicy {
  enum class Kind { All, FixedFraction, Scheduled };
  Kind kind = Kind::All;
  double fraction = 1.0;
  std::optional<std::uint64_t> seed;           // defaults to the run seed
  std::vector<std::vector<AgentId>> schedule;  // per episode; cycles when shorter

  bool operator==(const ActivityPolicy&) const = default;
};

struct EngineConfig {
  std::string component = "simultaneous";
  int max_steps = 10;
  Dynamics dynamics = Dynamics::Parallel;
  int parallelism = 4;
  BudgetPolicy budget;
  ActivityPolicy activity;
  std::optional<int> abort_at_episode;  // failure injection

  bool operator==(const EngineConfig&) const = default;
};

/// Registered engine components and the dynamics each implies by default.
Dynamics default_dynamics(const std::string& engine_component);
bool is_engine_component(const std::string& name);

std::string to_string(Dynamics);
std::string to_string(BudgetPolicy::Kind);

Json to_json(const EngineConfig&);
/// `execution` is the simulation.execution mapping (may be null).
EngineConfig engine_config_from_json(const std::string& component, const Json& execution,
                                     const std::string& pointer);

}  // namespace socsim
