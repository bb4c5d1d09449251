#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "socsim/config.hpp"
#include "socsim/opinion.hpp"
#include "socsim/social.hpp"

namespace socsim {

enum class ActionKind { Post, Repost, Reply, Like, Finish };

std::string to_string(ActionKind);
std::optional<ActionKind> action_kind_from_string(std::string_view s);

/// The action contract shown to oracles and enforced by parse_intent.
struct ActionSchema {
  std::vector<ActionKind> kinds;  // kinds the environment permits

  bool allows(ActionKind k) const;
  /// Machine-readable form embedded in prompts.
  Json document() const;

  static ActionSchema social();
  static ActionSchema opinion();
};

struct IntendedAction {
  AgentId agent;
  ActionKind kind = ActionKind::Finish;
  std::optional<PostId> target;
  std::optional<std::string> text;
  std::string raw_model_output;
};

struct ParseFailure {
  std::string reason;
  std::string raw_model_output;
};

using ParseResult = std::variant<IntendedAction, ParseFailure>;

/// Extracts the first JSON object from the output (surrounding prose is
/// tolerated) and checks it field by field against the schema.
ParseResult parse_intent(std::string_view raw_model_output, const ActionSchema& schema, const AgentId& agent = {});

struct ResolvedAction {
  IntendedAction intent;
  bool accepted = false;
  std::string reason;  // empty when accepted
};

struct ObsItem {
  std::string ref;     // post id, or neighbour id in the opinion environment
  std::string author;
  std::string kind;    // post | repost | reply | opinion
  std::optional<PostId> parent;
  std::string text;
  std::optional<double> belief;
};

struct Observation {
  AgentId agent;
  int episode = 0;
  std::vector<ObsItem> items;
  int remaining_budget = 0;
  std::string context_excerpt;
  std::vector<std::string> actions_taken;  // this turn, rendered
  bool error = false;
  std::vector<Json> notes;  // records the engine must log (timeline errors)
};

std::string render_item(const ObsItem& item);

/// Per-turn bookkeeping for validation against a snapshot.
struct TurnScratch {
  std::set<PostId> pending_likes;
};

/// Forms observations from world state and resolves intents against it.
class GameMaster {
 public:
  virtual ~GameMaster() = default;

  virtual const ActionSchema& schema() const = 0;
  virtual std::unique_ptr<GameMaster> clone() const = 0;

  /// Publishes scheduled content; records go to the log.
  virtual std::vector<Json> begin_episode(int episode) = 0;
  /// Pure read.
  virtual Observation observe(const AgentId& agent, int episode, int remaining_budget) const = 0;
  /// Never mutates the world.
  virtual ResolvedAction validate(const IntendedAction& intent, int remaining_budget,
                                  const TurnScratch& scratch) const = 0;
  /// Applies an accepted action; returns the action record.
  virtual Json commit(const IntendedAction& intent, int episode) = 0;
  /// Hook for probe answers that feed back into the world.
  virtual std::vector<Json> after_probe(const AgentId& agent, const Probe& probe, const std::string& raw_answer,
                                        int episode);
  virtual void end_episode(int episode) { (void)episode; }

  /// Everything evaluation needs to rebuild the initial world.
  virtual Json init_record() const = 0;
  virtual std::map<std::string, std::string> exports() const = 0;
  virtual std::string digest() const = 0;
};

class SocialGameMaster : public GameMaster {
 public:
  SocialGameMaster(SocialState state, Scenario scenario, SocialParams params,
                   std::map<AgentId, std::string> personas, std::shared_ptr<EmbeddingProvider> provider);

  const ActionSchema& schema() const override { return schema_; }
  std::unique_ptr<GameMaster> clone() const override;
  std::vector<Json> begin_episode(int episode) override;
  Observation observe(const AgentId& agent, int episode, int remaining_budget) const override;
  ResolvedAction validate(const IntendedAction& intent, int remaining_budget,
                          const TurnScratch& scratch) const override;
  Json commit(const IntendedAction& intent, int episode) override;
  Json init_record() const override;
  std::map<std::string, std::string> exports() const override;
  std::string digest() const override { return state_.digest(); }

  const SocialState& state() const { return state_; }

 private:
  SocialState state_;
  Scenario scenario_;
  SocialParams params_;
  std::map<AgentId, std::string> personas_;
  std::shared_ptr<EmbeddingProvider> provider_;
  ActionSchema schema_ = ActionSchema::social();
};

class OpinionGameMaster : public GameMaster {
 public:
  OpinionGameMaster(BeliefGraph graph, Scenario scenario, OpinionParams params, std::uint64_t seed);

  const ActionSchema& schema() const override { return schema_; }
  std::unique_ptr<GameMaster> clone() const override;
  std::vector<Json> begin_episode(int episode) override;
  Observation observe(const AgentId& agent, int episode, int remaining_budget) const override;
  ResolvedAction validate(const IntendedAction& intent, int remaining_budget,
                          const TurnScratch& scratch) const override;
  Json commit(const IntendedAction& intent, int episode) override;
  std::vector<Json> after_probe(const AgentId& agent, const Probe& probe, const std::string& raw_answer,
                                int episode) override;
  void end_episode(int episode) override;
  Json init_record() const override;
  std::map<std::string, std::string> exports() const override;
  std::string digest() const override;

  const BeliefGraph& graph() const { return graph_; }
  const BeliefTrajectory& trajectory() const { return trajectory_; }

 private:
  BeliefGraph graph_;
  Scenario scenario_;
  OpinionParams params_;
  std::uint64_t seed_;
  std::map<AgentId, std::string> opinions_;
  BeliefTrajectory trajectory_;
  ActionSchema schema_ = ActionSchema::opinion();
};

/// Builds the configured world for a resolved config. Node/agent order is the
/// roster order.
std::unique_ptr<GameMaster> make_game_master(const ResolvedConfig& rc);

std::string context_excerpt(const std::string& settings, int chars);

}  // namespace socsim
