#include "socsim/social.hpp"

#include <algorithm>

#include "socsim/http.hpp"

namespace socsim {

std::string to_string(PostKind k) {
  switch (k) {
    case PostKind::Post: return "post";
    case PostKind::Repost: return "repost";
    case PostKind::Reply: return "reply";
  }
  return "?";
}

SocialState::SocialState(std::vector<AgentId> agents, std::vector<std::string> streams)
    : agents_(std::move(agents)), streams_(std::move(streams)) {}

bool SocialState::is_agent(const std::string& id) const {
  return std::find(agents_.begin(), agents_.end(), id) != agents_.end();
}

bool SocialState::is_stream(const std::string& id) const {
  return std::find(streams_.begin(), streams_.end(), id) != streams_.end();
}

const Post* SocialState::find(const PostId& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &posts_[it->second];
}

const Post& SocialState::root_of(const Post& p) const {
  const Post* cur = &p;
  while (cur->kind == PostKind::Repost && cur->parent_id) {
    const Post* parent = find(*cur->parent_id);
    if (!parent) break;
    cur = parent;
  }
  return *cur;
}

bool SocialState::follows(const std::string& follower, const std::string& followee) const {
  return follows_.count({follower, followee}) > 0;
}

void SocialState::add_follow(const AgentId& follower, const std::string& followee) {
  if (follower == followee) throw SimulationError("self-follow '" + follower + "'");
  follows_.insert({follower, followee});
}

std::size_t SocialState::like_count_recorded(const PostId& post) const {
  return static_cast<std::size_t>(
      std::count_if(likes_.begin(), likes_.end(), [&](const Like& l) { return l.post == post; }));
}

const Post& SocialState::append_post(const std::string& author, PostKind kind, std::optional<PostId> parent,
                                     std::string text, int episode) {
  Post p;
  p.index = static_cast<int>(posts_.size());
  p.id = "p" + std::to_string(p.index + 1);
  p.author = author;
  p.kind = kind;
  p.parent_id = std::move(parent);
  p.text = std::move(text);
  p.episode = episode;
  by_id_[p.id] = posts_.size();
  posts_.push_back(std::move(p));
  return posts_.back();
}

bool SocialState::add_like(const AgentId& agent, const PostId& post, int episode) {
  if (!like_set_.insert({agent, post}).second) return false;
  likes_.push_back({agent, post, episode});
  posts_[by_id_.at(post)].like_count += 1;
  return true;
}

std::vector<std::vector<int>> SocialState::agent_adjacency() const {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < agents_.size(); ++i) index[agents_[i]] = static_cast<int>(i);
  std::vector<std::set<int>> sets(agents_.size());
  for (const auto& [a, b] : follows_) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) continue;
    sets[ia->second].insert(ib->second);
    sets[ib->second].insert(ia->second);
  }
  std::vector<std::vector<int>> adj;
  for (const auto& s : sets) adj.emplace_back(s.begin(), s.end());
  return adj;
}

Json SocialState::to_json() const {
  Json posts = Json::array();
  for (const auto& p : posts_) {
    Json j{{"id", p.id}, {"author", p.author}, {"kind", socsim::to_string(p.kind)},
           {"text", p.text}, {"episode", p.episode}, {"likes", p.like_count}};
    if (p.parent_id) j["parent_id"] = *p.parent_id;
    posts.push_back(j);
  }
  Json follows = Json::array();
  for (const auto& [a, b] : follows_) follows.push_back({a, b});
  Json likes = Json::array();
  for (const auto& l : likes_) likes.push_back({l.agent, l.post, l.episode});
  return {{"posts", posts}, {"follows", follows}, {"likes", likes}};
}

std::string SocialState::digest() const { return sha256_hex(canonical_bytes(to_json())); }

SocialState seed_social_state(const Scenario& s, const std::vector<AgentId>& agents, std::uint64_t seed) {
  std::vector<std::string> streams;
  for (const auto& st : s.streams) streams.push_back(st.name);
  // scenario actors without an agent still author context
  for (const auto& a : s.actors)
    if (std::find(agents.begin(), agents.end(), a.name) == agents.end()) streams.push_back(a.name);
  SocialState state(agents, streams);

  const auto& topo = s.initialization.topology;
  const auto kind = topo.value("kind", std::string("complete"));
  if (kind == "complete") {
    for (const auto& a : agents) {
      for (const auto& b : agents)
        if (a != b) state.add_follow(a, b);
      for (const auto& st : streams) state.add_follow(a, st);
    }
  } else if (kind == "random") {
    const double p = topo.value("p", 0.5);
    Rng rng(derive_seed(s.initialization.seed.value_or(seed), {fnv1a64("follows")}));
    for (const auto& a : agents) {
      for (const auto& b : agents)
        if (a != b && rng.chance(p)) state.add_follow(a, b);
      for (const auto& st : streams) state.add_follow(a, st);
    }
  } else if (kind == "explicit") {
    for (const auto& e : topo.value("edges", Json::array())) {
      const auto a = e.at(0).get<std::string>(), b = e.at(1).get<std::string>();
      if (state.is_agent(a) && state.is_source(b) && a != b) state.add_follow(a, b);
    }
  }
  for (const auto& item : s.initialization.history) state.append_post(item.author, PostKind::Post, {}, item.text, 0);
  return state;
}

void publish_context(SocialState& state, const Scenario& s, int episode) {
  for (const auto& item : s.context)
    if (item.episode == episode) state.append_post(item.author, PostKind::Post, {}, item.text, episode);
}

std::pair<SocialDelta, Json> apply_action(SocialState& state, const SocialAction& a) {
  SocialDelta d;
  Json rec{{"type", "action"}, {"episode", a.episode}, {"agent", a.agent}};
  switch (a.kind) {
    case SocialActionKind::Post:
    case SocialActionKind::Reply:
    case SocialActionKind::Repost: {
      const auto kind = a.kind == SocialActionKind::Post    ? PostKind::Post
                        : a.kind == SocialActionKind::Reply ? PostKind::Reply
                                                            : PostKind::Repost;
      std::optional<PostId> parent;
      if (kind != PostKind::Post) parent = a.target;
      const std::string text = kind == PostKind::Repost ? std::string() : a.text;
      const auto& p = state.append_post(a.agent, kind, parent, text, a.episode);
      d.mutated = true;
      d.post_id = p.id;
      rec["kind"] = to_string(kind);
      rec["post_id"] = p.id;
      rec["parent_id"] = parent ? Json(*parent) : Json(nullptr);
      rec["text"] = text;
      rec["text_digest"] = short_digest(text);
      break;
    }
    case SocialActionKind::Like: {
      const bool added = state.add_like(a.agent, *a.target, a.episode);
      d.mutated = added;
      d.duplicate_like = !added;
      rec["kind"] = "like";
      rec["post_id"] = *a.target;
      rec["parent_id"] = nullptr;
      rec["text_digest"] = short_digest("");
      if (!added) rec["duplicate"] = true;
      break;
    }
  }
  return {d, rec};
}

std::vector<Post> timeline_chronological(const SocialState& state, const AgentId& agent, int k) {
  if (!state.is_agent(agent)) throw SimulationError("unknown agent '" + agent + "'");
  std::vector<Post> out;
  const auto& posts = state.posts();
  // posts are stored in creation order, so walking backwards is newest first
  for (auto it = posts.rbegin(); it != posts.rend() && static_cast<int>(out.size()) < k; ++it)
    if (state.follows(agent, it->author)) out.push_back(*it);
  return out;
}

std::string UserProfileText::text() const {
  std::string out = persona_summary;
  for (const auto& p : recent_posts) out += "\n" + p;
  for (const auto& l : recent_likes) out += "\n" + l;
  return out;
}

UserProfileText build_profile(const SocialState& state, const AgentId& agent, const std::string& persona) {
  if (!state.is_agent(agent)) throw SimulationError("unknown agent '" + agent + "'");
  UserProfileText prof;
  prof.persona_summary = persona;
  const auto& posts = state.posts();
  for (auto it = posts.rbegin(); it != posts.rend() && prof.recent_posts.size() < 10; ++it)
    if (it->author == agent && it->kind != PostKind::Repost) prof.recent_posts.push_back(it->text);
  const auto& likes = state.likes();
  for (auto it = likes.rbegin(); it != likes.rend() && prof.recent_likes.size() < 10; ++it)
    if (it->agent == agent) prof.recent_likes.push_back(state.display_text(*state.find(it->post)));
  return prof;
}

Eigen::VectorXd HashEmbedding::embed(const std::string& text) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  for (const auto& tok : tokenize(text)) {
    const auto h = fnv1a64(tok);
    v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_))] += (h >> 63) ? -1.0 : 1.0;
  }
  if (!text.empty() && v.isZero(0.0)) {
    // no tokens, or signs cancelled: fall back to the whole string
    v[static_cast<Eigen::Index>(fnv1a64(text) % static_cast<std::uint64_t>(dim_))] += 1.0;
  }
  return v;
}

HttpEmbedding::HttpEmbedding(std::string url, std::string model, double timeout_s, std::string api_key)
    : url_(std::move(url)), model_(std::move(model)), timeout_s_(timeout_s), api_key_(std::move(api_key)) {}

Eigen::VectorXd HttpEmbedding::embed(const std::string& text) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(text); it != cache_.end()) return it->second;
  }
  Json body{{"input", text}};
  if (!model_.empty()) body["model"] = model_;
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res = http_post_json(url_, body, headers, timeout_s_);
  if (res.status < 200 || res.status >= 300)
    throw IoError("embedding endpoint returned HTTP " + std::to_string(res.status));
  Eigen::VectorXd v;
  try {
    const auto arr = Json::parse(res.body).at("data").at(0).at("embedding");
    v.resize(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed embedding response: ") + e.what());
  }
  std::lock_guard lock(mu_);
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (v.size() != dim_) throw IoError("embedding dimension changed between calls");
  cache_[text] = v;
  return v;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::vector<Post> timeline_recommender(const SocialState& state, const AgentId& agent, int k,
                                       EmbeddingProvider& provider, const std::string& persona) {
  const auto profile = provider.embed(build_profile(state, agent, persona).text());
  struct Scored {
    double score;
    const Post* post;
  };
  std::vector<Scored> pool;
  for (const auto& p : state.posts()) {
    if (p.author == agent) continue;
    const auto v = provider.embed(state.display_text(p));
    if (v.size() != profile.size()) throw IoError("embedding dimension mismatch");
    pool.push_back({cosine(profile, v), &p});
  }
  std::sort(pool.begin(), pool.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.post->episode != b.post->episode) return a.post->episode > b.post->episode;
    if (a.post->index != b.post->index) return a.post->index > b.post->index;
    return a.post->id < b.post->id;
  });
  std::vector<Post> out;
  for (std::size_t i = 0; i < pool.size() && static_cast<int>(i) < k; ++i) out.push_back(*pool[i].post);
  return out;
}

}  // namespace socsim
