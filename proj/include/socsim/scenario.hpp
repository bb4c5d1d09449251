#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "socsim/agent_spec.hpp"
#include "socsim/document.hpp"

namespace socsim {

struct ActorSeed {
  std::string name;
  std::string role;
  PersonaCard persona;

  bool operator==(const ActorSeed&) const = default;
};

/// A named non-agent content source (news stream).
struct StreamSeed {
  std::string name;
  std::string description;

  bool operator==(const StreamSeed&) const = default;
};

struct ContextItem {
  std::string author;
  std::string text;
  int episode = 0;  // published at the start of this episode

  bool operator==(const ContextItem&) const = default;
};

struct Initialization {
  /// Social follow topology: {kind: complete | random | explicit, p, edges}.
  Json topology = Json{{"kind", "complete"}};
  std::map<std::string, std::vector<std::string>> memory_seeds;
  std::vector<ContextItem> history;  // pre-simulation posts
  std::optional<std::uint64_t> seed;
  std::vector<double> beliefs;  // initial beliefs, actor order (opinion environment)

  bool operator==(const Initialization&) const = default;
};

struct Scenario {
  std::string name;
  std::string settings;
  std::string claim;  // stance claim for post scoring, optional
  std::vector<ActorSeed> actors;
  std::vector<StreamSeed> streams;
  std::vector<ContextItem> context;
  Initialization initialization;

  bool operator==(const Scenario&) const = default;
};

struct Violation {
  std::string path;
  std::string message;
};

Scenario scenario_from_json(const Json& j, const std::string& pointer = "");
Json to_json(const Scenario& s);

Scenario load_scenario_file(const std::string& path);

/// Lists every invariant breach; an empty report means the scenario is valid.
std::vector<Violation> validate_scenario(const Scenario& s);

/// Resolves a scenario reference: an existing path, else `<name>.yaml` under
/// the given search directories, then $SOCSIM_SCENARIO_PATH, then the
/// bundled data directory.
std::string find_scenario_file(const std::string& ref, const std::vector<std::string>& search_dirs);

}  // namespace socsim
