#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "socsim/common.hpp"
#include "socsim/document.hpp"
#include "socsim/scenario.hpp"

namespace socsim {

enum class PostKind { Post, Repost, Reply };

std::string to_string(PostKind);

struct Post {
  PostId id;
  std::string author;  // agent id or stream name
  PostKind kind = PostKind::Post;
  std::optional<PostId> parent_id;
  std::string text;  // empty for reposts
  int episode = 0;
  int index = 0;  // global creation order
  int like_count = 0;
};

struct Like {
  AgentId agent;
  PostId post;
  int episode = 0;
};

/// Posts, follows and likes of the twitter-like backend. Posts are
/// append-only; ids are "p<n>" in creation order.
class SocialState {
 public:
  SocialState() = default;
  SocialState(std::vector<AgentId> agents, std::vector<std::string> streams);

  const std::vector<AgentId>& agents() const { return agents_; }
  const std::vector<std::string>& streams() const { return streams_; }
  bool is_agent(const std::string& id) const;
  bool is_source(const std::string& id) const { return is_agent(id) || is_stream(id); }
  bool is_stream(const std::string& id) const;

  const std::vector<Post>& posts() const { return posts_; }
  const Post* find(const PostId& id) const;
  /// Follows repost parents up to the post that carries text.
  const Post& root_of(const Post& p) const;
  /// Text a reader sees for this post (the root text for a repost).
  const std::string& display_text(const Post& p) const { return root_of(p).text; }

  bool follows(const std::string& follower, const std::string& followee) const;
  void add_follow(const AgentId& follower, const std::string& followee);
  const std::set<std::pair<std::string, std::string>>& follow_edges() const { return follows_; }

  bool liked(const AgentId& agent, const PostId& post) const { return like_set_.count({agent, post}) > 0; }
  const std::vector<Like>& likes() const { return likes_; }
  std::size_t like_count_recorded(const PostId& post) const;

  /// Low-level append used by apply_action and scenario seeding.
  const Post& append_post(const std::string& author, PostKind kind, std::optional<PostId> parent, std::string text,
                          int episode);
  bool add_like(const AgentId& agent, const PostId& post, int episode);

  /// Undirected agent-agent adjacency from follows in either direction.
  std::vector<std::vector<int>> agent_adjacency() const;

  Json to_json() const;
  std::string digest() const;

 private:
  std::vector<AgentId> agents_;
  std::vector<std::string> streams_;
  std::vector<Post> posts_;
  std::unordered_map<PostId, std::size_t> by_id_;
  std::set<std::pair<std::string, std::string>> follows_;
  std::vector<Like> likes_;
  std::set<std::pair<AgentId, PostId>> like_set_;
};

/// Builds the initial state: follow topology and pre-simulation history.
SocialState seed_social_state(const Scenario& s, const std::vector<AgentId>& agents, std::uint64_t seed);

/// Context items scheduled for the given episode, published by their authors.
void publish_context(SocialState& state, const Scenario& s, int episode);

enum class SocialActionKind { Post, Repost, Reply, Like };

struct SocialAction {
  AgentId agent;
  SocialActionKind kind = SocialActionKind::Post;
  std::optional<PostId> target;
  std::string text;
  int episode = 0;
};

struct SocialDelta {
  bool mutated = false;
  std::optional<PostId> post_id;
  bool duplicate_like = false;
};

/// Commits one validated action. A repeated like is a no-op flagged in the
/// returned record.
std::pair<SocialDelta, Json> apply_action(SocialState& state, const SocialAction& action);

std::vector<Post> timeline_chronological(const SocialState& state, const AgentId& agent, int k);

struct UserProfileText {
  std::string persona_summary;
  std::vector<std::string> recent_posts;  // newest first
  std::vector<std::string> recent_likes;  // newest first

  std::string text() const;
};

UserProfileText build_profile(const SocialState& state, const AgentId& agent, const std::string& persona);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  /// Throws IoError when the provider cannot answer.
  virtual Eigen::VectorXd embed(const std::string& text) = 0;
};

/// Signed feature hashing over the shared tokenizer.
class HashEmbedding : public EmbeddingProvider {
 public:
  explicit HashEmbedding(int dim = 256) : dim_(dim) {}
  std::string name() const override { return "hash"; }
  int dim() const override { return dim_; }
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  int dim_;
};

/// OpenAI-format embeddings endpoint ({"input": ..} -> data[0].embedding),
/// memoized per text.
class HttpEmbedding : public EmbeddingProvider {
 public:
  HttpEmbedding(std::string url, std::string model, double timeout_s, std::string api_key = {});
  std::string name() const override { return "http"; }
  int dim() const override { return dim_; }
  Eigen::VectorXd embed(const std::string& text) override;

 private:
  std::string url_;
  std::string model_;
  double timeout_s_;
  std::string api_key_;
  int dim_ = 0;
  std::mutex mu_;
  std::unordered_map<std::string, Eigen::VectorXd> cache_;
};

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Top-k posts not authored by the agent, ranked by cosine similarity to the
/// agent's profile; ties go to the newer post, then the smaller id.
std::vector<Post> timeline_recommender(const SocialState& state, const AgentId& agent, int k,
                                       EmbeddingProvider& provider, const std::string& persona);

}  // namespace socsim
