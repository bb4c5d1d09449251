#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tsupport {

namespace fs = std::filesystem;
using namespace socsim;

int Gen::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(eng_() % span);
}

double Gen::real(double lo, double hi) {
  const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::string Gen::text(int min_words, int max_words) {
  static const std::vector<std::string> words{"the",  "Data", "vote", "news", "AI",    "jobs",  "ok",
                                              "fake", "real", "town", "hall", "bill",  "bradley", "2024",
                                              "we",   "are",  "not",  "sure", "café",  "snake_case"};
  static const std::vector<std::string> seps{" ", " ", " ", ", ", ". ", "! ", " -- ", "\n"};
  const int n = integer(min_words, max_words);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += pick(seps);
    std::string w = pick(words);
    if (coin(0.2)) std::transform(w.begin(), w.end(), w.begin(), [](char c) { return c >= 'a' && c <= 'z' ? c - 32 : c; });
    out += w;
  }
  if (coin(0.3)) out += "?";
  return out;
}

fs::path data_dir() { return SOCSIM_DATA_DIR; }
fs::path golden_dir() { return SOCSIM_GOLDEN_DIR; }

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("socsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SimulationConfig config_from_yaml(const std::string& yaml) {
  return parse_config(yaml, (data_dir() / "configs").string());
}

SimulationConfig data_config(const std::string& name) {
  return load_config_file((data_dir() / "configs" / (name + ".yaml")).string());
}

// ---------------------------------------------------------------------------

std::vector<std::string> ref_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z')
      cur += static_cast<char>(c + ('a' - 'A'));
    else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80)
      cur += ch;
    else
      flush();
  }
  flush();
  return out;
}

std::optional<double> ref_ttr(const RefCorpus& c) {
  std::vector<std::string> all;
  for (const auto& p : c.posts)
    for (const auto& t : ref_tokenize(p)) all.push_back(t);
  if (all.empty()) return std::nullopt;
  std::vector<std::string> uniq;
  for (const auto& t : all)
    if (std::find(uniq.begin(), uniq.end(), t) == uniq.end()) uniq.push_back(t);
  return static_cast<double>(uniq.size()) / static_cast<double>(all.size());
}

std::optional<double> ref_opener_variety(const RefCorpus& c, std::size_t prefix) {
  if (c.posts.empty()) return std::nullopt;
  std::vector<std::vector<std::string>> seen;
  for (const auto& p : c.posts) {
    auto t = ref_tokenize(p);
    if (t.size() > prefix) t.resize(prefix);
    bool dup = false;
    for (const auto& s : seen) dup = dup || s == t;
    if (!dup) seen.push_back(t);
  }
  return static_cast<double>(seen.size()) / static_cast<double>(c.posts.size());
}

std::optional<double> ref_distinctiveness(const std::vector<RefCorpus>& cs) {
  std::vector<std::map<std::string, long double>> tf;
  for (const auto& c : cs) {
    if (c.posts.size() < 2) continue;
    std::map<std::string, long double> m;
    for (const auto& p : c.posts)
      for (const auto& t : ref_tokenize(p)) m[t] += 1;
    tf.push_back(m);
  }
  if (tf.size() < 2) return std::nullopt;
  long double sum = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < tf.size(); ++i)
    for (std::size_t j = i + 1; j < tf.size(); ++j) {
      long double dot = 0, ni = 0, nj = 0;
      for (const auto& [w, v] : tf[i]) {
        ni += v * v;
        auto it = tf[j].find(w);
        if (it != tf[j].end()) dot += v * it->second;
      }
      for (const auto& [w, v] : tf[j]) nj += v * v;
      const long double cos = (ni == 0 || nj == 0) ? 0 : dot / std::sqrt(ni * nj);
      sum += 1 - cos;
      ++pairs;
    }
  return static_cast<double>(sum / pairs);
}

std::optional<double> ref_probe_diversity(const ProbeAnswers& a) {
  std::vector<long double> means;
  for (const auto& [agent, vals] : a) {
    long double s = 0;
    int k = 0;
    for (const auto& v : vals)
      if (v) s += *v, ++k;
    if (k) means.push_back(s / k);
  }
  if (means.size() < 2) return std::nullopt;
  long double mu = 0;
  for (auto m : means) mu += m;
  mu /= means.size();
  long double var = 0;
  for (auto m : means) var += (m - mu) * (m - mu);
  return static_cast<double>(std::sqrt(var / means.size()));
}

namespace {

std::vector<std::set<int>> neighbours(const RefGraph& g) {
  std::vector<std::set<int>> nb(static_cast<std::size_t>(g.n));
  for (auto [u, v] : g.edges) {
    if (u == v) continue;
    nb[u].insert(v);
    nb[v].insert(u);
  }
  return nb;
}

}  // namespace

std::optional<double> ref_polarization(const std::vector<double>& b) {
  if (b.size() < 2) return std::nullopt;
  long double mu = 0;
  for (double x : b) mu += x;
  mu /= b.size();
  long double s = 0;
  for (double x : b) s += (x - mu) * (x - mu);
  return static_cast<double>(s / b.size());
}

std::optional<double> ref_global_disagreement(const RefGraph& g, const std::vector<double>& b) {
  const auto nb = neighbours(g);
  long double total = 0;
  int counted = 0;
  for (int i = 0; i < g.n; ++i) {
    if (nb[i].empty()) continue;
    long double s = 0;
    for (int j : nb[i]) s += std::fabs(static_cast<long double>(b[i]) - b[j]);
    total += s / nb[i].size();
    ++counted;
  }
  if (!counted) return std::nullopt;
  return static_cast<double>(total / counted);
}

std::optional<double> ref_nci(const RefGraph& g, const std::vector<double>& b) {
  const auto nb = neighbours(g);
  std::vector<long double> x, y;
  for (int i = 0; i < g.n; ++i) {
    if (nb[i].empty()) continue;
    long double s = 0;
    for (int j : nb[i]) s += b[j];
    x.push_back(b[i]);
    y.push_back(s / nb[i].size());
  }
  if (x.size() < 2) return std::nullopt;
  const long double n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx / n <= 1e-20 || syy / n <= 1e-20) return std::nullopt;
  const long double r = sxy / std::sqrt(sxx * syy);
  return static_cast<double>(std::clamp<long double>(r, -1, 1));
}

std::optional<double> ref_volatility(const std::vector<std::vector<double>>& snaps) {
  if (snaps.size() < 2 || snaps[0].empty()) return std::nullopt;
  long double s = 0;
  for (std::size_t t = 1; t < snaps.size(); ++t)
    for (std::size_t i = 0; i < snaps[t].size(); ++i) s += std::fabs(static_cast<long double>(snaps[t][i]) - snaps[t - 1][i]);
  return static_cast<double>(s / (snaps[0].size() * (snaps.size() - 1)));
}

double ref_wilcoxon_exact_p(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  const auto n = d.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    int below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++below;
      if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
    }
    rank[i] = below + (equal + 1) / 2.0;
  }
  double w = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) w += rank[i];
  long long le = 0, ge = 0;
  const long long patterns = 1LL << n;
  for (long long mask = 0; mask < patterns; ++mask) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += rank[i];
    if (s <= w) ++le;
    if (s >= w) ++ge;
  }
  return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns));
}

std::vector<double> ref_holm(const std::vector<double>& p) {
  const auto m = p.size();
  // position of each p-value in ascending order, ties by input index
  std::vector<std::size_t> pos(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (p[j] < p[i] || (p[j] == p[i] && j < i)) ++r;
    pos[i] = r;
  }
  std::vector<double> adj(m);
  for (std::size_t i = 0; i < m; ++i) {
    double best = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (pos[j] <= pos[i]) best = std::max(best, std::min(1.0, static_cast<double>(m - pos[j]) * p[j]));
    adj[i] = best;
  }
  return adj;
}

std::vector<PostId> ref_chronological(const SocialState& s, const AgentId& agent, int k) {
  std::vector<const Post*> seen;
  for (const auto& p : s.posts())
    if (s.follow_edges().count({agent, p.author})) seen.push_back(&p);
  std::sort(seen.begin(), seen.end(), [](const Post* a, const Post* b) { return a->index > b->index; });
  std::vector<PostId> out;
  for (const auto* p : seen)
    if (static_cast<int>(out.size()) < k) out.push_back(p->id);
  return out;
}

namespace {

const Post& ref_root(const SocialState& s, const Post& p) {
  const Post* cur = &p;
  while (cur->kind == PostKind::Repost && cur->parent_id && s.find(*cur->parent_id)) cur = s.find(*cur->parent_id);
  return *cur;
}

// The hash provider is the thing under test's input, not part of the ranking,
// so the oracle uses it directly.
Eigen::VectorXd ref_embed(const std::string& text, int dim) {
  HashEmbedding h(dim);
  return h.embed(text);
}

double ref_cos(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<PostId> ref_recommender(const SocialState& s, const AgentId& agent, int k, int dim,
                                    const std::string& persona) {
  std::string profile = persona;
  int n = 0;
  for (int i = static_cast<int>(s.posts().size()) - 1; i >= 0 && n < 10; --i) {
    const auto& p = s.posts()[i];
    if (p.author == agent && p.kind != PostKind::Repost) profile += "\n" + p.text, ++n;
  }
  n = 0;
  for (int i = static_cast<int>(s.likes().size()) - 1; i >= 0 && n < 10; --i) {
    const auto& l = s.likes()[i];
    if (l.agent == agent) profile += "\n" + ref_root(s, *s.find(l.post)).text, ++n;
  }
  const auto pv = ref_embed(profile, dim);

  struct Cand {
    const Post* p;
    double score;
  };
  std::vector<Cand> cands;
  for (const auto& p : s.posts())
    if (p.author != agent) cands.push_back({&p, ref_cos(pv, ref_embed(ref_root(s, p).text, dim))});
  auto ahead = [](const Cand& a, const Cand& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.p->episode != b.p->episode) return a.p->episode > b.p->episode;
    if (a.p->index != b.p->index) return a.p->index > b.p->index;
    return a.p->id < b.p->id;
  };
  // place every candidate by counting who beats it
  std::vector<PostId> slots(cands.size());
  for (const auto& c : cands) {
    std::size_t r = 0;
    for (const auto& o : cands)
      if (ahead(o, c)) ++r;
    slots[r] = c.p->id;
  }
  if (static_cast<int>(slots.size()) > k) slots.resize(static_cast<std::size_t>(k));
  return slots;
}

SocialState random_social_state(Gen& g) {
  const int na = g.integer(1, 8), ns = g.integer(0, 2);
  std::vector<AgentId> agents;
  std::vector<std::string> streams;
  for (int i = 0; i < na; ++i) agents.push_back("a" + std::to_string(i));
  for (int i = 0; i < ns; ++i) streams.push_back("s" + std::to_string(i));
  SocialState s(agents, streams);
  for (const auto& a : agents) {
    for (const auto& b : agents)
      if (a != b && g.coin(0.5)) s.add_follow(a, b);
    for (const auto& st : streams)
      if (g.coin(0.7)) s.add_follow(a, st);
  }
  std::vector<std::string> texts;
  const int n_posts = g.integer(0, 40);
  int episode = 0;
  for (int i = 0; i < n_posts; ++i) {
    if (g.coin(0.25)) ++episode;
    std::vector<std::string> authors = agents;
    authors.insert(authors.end(), streams.begin(), streams.end());
    const auto& author = g.pick(authors);
    const bool is_agent = s.is_agent(author);
    const int roll = g.integer(0, 9);
    if (is_agent && !s.posts().empty() && roll < 2) {
      s.append_post(author, PostKind::Repost, g.pick(s.posts()).id, "", episode);
    } else if (is_agent && !s.posts().empty() && roll < 4) {
      const auto parent = g.pick(s.posts()).id;
      s.append_post(author, PostKind::Reply, parent, g.text(1, 8), episode);
    } else {
      std::string t = (!texts.empty() && g.coin(0.3)) ? g.pick(texts) : g.text(0, 10);
      texts.push_back(t);
      s.append_post(author, PostKind::Post, {}, t, episode);
    }
    if (!s.posts().empty() && g.coin(0.4)) s.add_like(g.pick(agents), g.pick(s.posts()).id, episode);
  }
  return s;
}

Graph to_graph(const RefGraph& g) {
  std::vector<std::pair<int, int>> e;
  for (auto [u, v] : g.edges)
    if (u != v) e.emplace_back(u, v);
  return Graph::from_edges(g.n, e);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace tsupport
