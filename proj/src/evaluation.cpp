#include "socsim/evaluation.hpp"

#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "socsim/http.hpp"

namespace socsim {

AgentCorpus AgentCorpus::from_posts(AgentId agent, std::vector<std::string> posts) {
  AgentCorpus c;
  c.agent = std::move(agent);
  c.posts = std::move(posts);
  for (const auto& p : c.posts) c.tokens.push_back(tokenize(p));
  return c;
}

std::size_t AgentCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& t : tokens) n += t.size();
  return n;
}

TermFrequency term_frequency(const AgentCorpus& c) {
  TermFrequency tf;
  for (const auto& post : c.tokens)
    for (const auto& t : post) ++tf[t];
  return tf;
}

std::optional<double> ttr(const AgentCorpus& c) {
  const auto total = c.token_count();
  if (total == 0) return std::nullopt;
  return static_cast<double>(term_frequency(c).size()) / static_cast<double>(total);
}

std::optional<double> opener_variety(const AgentCorpus& c, std::size_t prefix_len) {
  if (c.posts.empty()) return std::nullopt;
  std::set<std::vector<std::string>> openers;
  for (const auto& t : c.tokens)
    openers.emplace(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(std::min(prefix_len, t.size())));
  return static_cast<double>(openers.size()) / static_cast<double>(c.posts.size());
}

std::optional<double> inter_agent_distinctiveness(const std::vector<AgentCorpus>& corpora) {
  std::vector<TermFrequency> tfs;
  for (const auto& c : corpora)
    if (c.posts.size() >= 2) tfs.push_back(term_frequency(c));
  if (tfs.size() < 2) return std::nullopt;

  std::map<std::string, int> vocab;
  for (const auto& tf : tfs)
    for (const auto& [w, _] : tf) vocab.emplace(w, 0);
  int col = 0;
  for (auto& [_, idx] : vocab) idx = col++;

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < tfs.size(); ++i)
    for (const auto& [w, n] : tfs[i]) trip.emplace_back(static_cast<int>(i), vocab.at(w), n);
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(tfs.size()), col);
  m.setFromTriplets(trip.begin(), trip.end());
  const Eigen::MatrixXd gram = Eigen::MatrixXd(m * m.transpose());

  double sum = 0.0;
  int pairs = 0;
  const auto n = gram.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double norm = std::sqrt(gram(i, i)) * std::sqrt(gram(j, j));
      const double cos = norm > 0.0 ? gram(i, j) / norm : 0.0;
      sum += 1.0 - cos;
      ++pairs;
    }
  return sum / pairs;
}

std::optional<double> probe_diversity(const ProbeAnswers& answers) {
  std::vector<double> means;
  for (const auto& [_, vals] : answers) {
    double s = 0.0;
    int k = 0;
    for (const auto& v : vals)
      if (v) {
        s += *v;
        ++k;
      }
    if (k > 0) means.push_back(s / k);
  }
  if (means.size() < 2) return std::nullopt;
  return summarize(means).sd;
}

// ---------------------------------------------------------------------------

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> s{"a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",  "for",
                                       "from", "has",  "have", "in",   "is",   "it",   "its",  "of",  "on",
                                       "or",   "that", "the",  "this", "to",   "was",  "were", "will", "with"};
  return s;
}

const std::set<std::string>& pro_words() {
  static const std::set<std::string> s{"true",    "confirmed", "agree", "correct", "real", "proven",
                                       "indeed",  "yes",       "fact",  "support", "right", "accurate"};
  return s;
}

const std::set<std::string>& anti_words() {
  static const std::set<std::string> s{"false",  "fake",     "hoax",  "debunked", "misleading", "wrong",
                                       "lie",    "lies",     "untrue", "disagree", "no",        "not",
                                       "myth",   "nonsense", "baseless", "misinformation"};
  return s;
}

}  // namespace

std::optional<StanceProbs> LexiconStance::classify(const std::string& text, const std::string& claim) {
  std::set<std::string> content;
  for (auto& t : tokenize(claim))
    if (t.size() >= 3 && !stopwords().count(t) && !pro_words().count(t) && !anti_words().count(t))
      content.insert(std::move(t));
  const auto toks = tokenize(text);
  const std::set<std::string> have(toks.begin(), toks.end());
  int overlap = 0;
  for (const auto& t : content) overlap += have.count(t) ? 1 : 0;
  int pro = 0, anti = 0;
  for (const auto& t : toks) {
    pro += pro_words().count(t) ? 1 : 0;
    anti += anti_words().count(t) ? 1 : 0;
  }
  const double r = content.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(content.size());
  // restating the claim without a denial reads as endorsement
  const int implicit = (anti == 0 && r > 0.0) ? 1 : 0;
  const int denom = pro + anti + implicit;
  if (denom == 0) return StanceProbs{};
  const double mass = std::max(r, 0.5);
  return StanceProbs{mass * (pro + implicit) / denom, mass * anti / denom};
}

std::optional<StanceProbs> HttpStance::classify(const std::string& text, const std::string& claim) {
  try {
    auto res = http_post_json(url_, Json{{"premise", text}, {"hypothesis", claim}}, {}, timeout_s_);
    if (res.status < 200 || res.status >= 300) return std::nullopt;
    const auto j = Json::parse(res.body);
    return StanceProbs{j.at("entail").get<double>(), j.at("contradict").get<double>()};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<double> stance_score(const std::string& text, const std::string& claim, StanceProvider& provider) {
  auto p = provider.classify(text, claim);
  if (!p) return std::nullopt;
  return std::clamp(p->pro - p->anti, -1.0, 1.0);
}

// ---------------------------------------------------------------------------

EngagementStats engagement_stats(const EventLog& log) {
  EngagementStats s;
  for (const auto& r : log.records()) {
    const auto type = r.value("type", std::string());
    if (type == "episode_start") {
      const int e = r.at("episode").get<int>();
      for (const auto& a : r.at("active")) {
        s.per_turn.emplace(std::make_pair(e, a.get<std::string>()), 0);
        ++s.active_agent_episodes;
      }
    } else if (type == "action") {
      if (r.value("duplicate", false)) continue;
      const auto kind = r.at("kind").get<std::string>();
      ++s.accepted;
      ++s.counts[kind];
      ++s.per_turn[{r.at("episode").get<int>(), r.at("agent").get<std::string>()}];
    }
  }
  if (s.active_agent_episodes > 0) s.total = static_cast<double>(s.accepted) / s.active_agent_episodes;
  for (const auto& [k, n] : s.counts) s.composition[k] = static_cast<double>(n) / s.accepted;
  auto count = [&](const char* k) {
    auto it = s.counts.find(k);
    return it == s.counts.end() ? 0 : it->second;
  };
  s.posts = count("post");
  s.interactions = count("like") + count("repost") + count("reply");
  s.partial = !log.complete();
  return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kZeroVariance = 1e-20;

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y, bool* ok) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double vx = dx.square().mean(), vy = dy.square().mean();
  *ok = vx > kZeroVariance && vy > kZeroVariance;
  if (!*ok) return 0.0;
  return (dx * dy).mean() / std::sqrt(vx * vy);
}

}  // namespace

std::optional<double> polarization(const Eigen::VectorXd& b) {
  if (b.size() < 2) return std::nullopt;
  return (b.array() - b.mean()).square().mean();
}

std::optional<double> global_disagreement(const Graph& g, const Eigen::VectorXd& b, std::vector<std::string>* warnings) {
  double sum = 0.0;
  int counted = 0;
  for (int i = 0; i < g.n; ++i) {
    const auto& nb = g.adj[static_cast<std::size_t>(i)];
    if (nb.empty()) {
      if (warnings) warnings->push_back("node " + std::to_string(i) + " is isolated; excluded");
      continue;
    }
    double d = 0.0;
    for (int j : nb) d += std::abs(b(i) - b(j));
    sum += d / static_cast<double>(nb.size());
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return sum / counted;
}

std::optional<double> nci(const Graph& g, const Eigen::VectorXd& b) {
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& [u, v] : g.edges) {
    trip.emplace_back(u, v, 1.0);
    trip.emplace_back(v, u, 1.0);
  }
  Eigen::SparseMatrix<double> a(g.n, g.n);
  a.setFromTriplets(trip.begin(), trip.end());
  const Eigen::VectorXd sums = a * b;

  std::vector<int> keep;
  for (int i = 0; i < g.n; ++i)
    if (g.degree(i) > 0) keep.push_back(i);
  if (keep.size() < 2) return std::nullopt;
  Eigen::VectorXd own(static_cast<Eigen::Index>(keep.size())), hood(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const int i = keep[k];
    own(static_cast<Eigen::Index>(k)) = b(i);
    hood(static_cast<Eigen::Index>(k)) = sums(i) / g.degree(i);
  }
  bool ok = false;
  const double r = pearson(own, hood, &ok);
  if (!ok) return std::nullopt;
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> volatility(const BeliefTrajectory& t) {
  if (t.snapshots.size() < 2) return std::nullopt;
  const auto n = t.snapshots.front().size();
  if (n == 0) return std::nullopt;
  double sum = 0.0;
  for (std::size_t s = 1; s < t.snapshots.size(); ++s) {
    if (t.snapshots[s].size() != n) throw std::invalid_argument("belief snapshots differ in size");
    sum += (t.snapshots[s] - t.snapshots[s - 1]).cwiseAbs().sum();
  }
  return sum / (static_cast<double>(n) * static_cast<double>(t.snapshots.size() - 1));
}

// ---------------------------------------------------------------------------

Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) return s;
  const Eigen::Map<const Eigen::ArrayXd> a(v.data(), static_cast<Eigen::Index>(v.size()));
  s.mean = a.mean();
  const double ss = (a - s.mean).square().sum();
  s.sd = std::sqrt(ss / s.n);
  if (s.n >= 2) s.ci95 = 1.96 * std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  return s;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("paired samples differ in length");
  if (x.size() < 5) throw std::invalid_argument("paired test needs at least 5 pairs");
  WilcoxonResult res;
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] - y[i] != 0.0) d.push_back(x[i] - y[i]);
  const int n = static_cast<int>(d.size());
  res.n_used = n;
  if (n == 0) {
    res.warning = "all paired differences are zero";
    return res;
  }

  // doubled midranks keep tied ranks integral
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<int> rank2(static_cast<std::size_t>(n));
  std::vector<int> tie_sizes;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    for (int k = i; k <= j; ++k) rank2[order[k]] = i + j + 2;
    tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  int w2 = 0;
  for (int i = 0; i < n; ++i)
    if (d[i] > 0) w2 += rank2[i];
  res.w_plus = w2 / 2.0;

  if (n <= 20) {
    const int total2 = n * (n + 1);
    std::vector<double> count(static_cast<std::size_t>(total2 + 1), 0.0);
    count[0] = 1.0;
    for (int i = 0; i < n; ++i)
      for (int s = total2; s >= rank2[i]; --s) count[s] += count[s - rank2[i]];
    const double all = std::ldexp(1.0, n);
    double le = 0.0, ge = 0.0;
    for (int s = 0; s <= total2; ++s) {
      if (s <= w2) le += count[s];
      if (s >= w2) ge += count[s];
    }
    res.p = std::min(1.0, 2.0 * std::min(le, ge) / all);
  } else {
    res.exact = false;
    const double nn = n;
    const double mean = nn * (nn + 1) / 4.0;
    double var = nn * (nn + 1) * (2 * nn + 1) / 24.0;
    for (int t : tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
    const double diff = res.w_plus - mean;
    const double corrected = diff == 0.0 ? 0.0 : diff - 0.5 * (diff > 0 ? 1.0 : -1.0);
    const double z = var > 0 ? corrected / std::sqrt(var) : 0.0;
    res.p = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  }
  return res;
}

std::vector<double> holm_adjust(const std::vector<double>& p) {
  const auto m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p[order[k]]));
    adj[order[k]] = running;
  }
  return adj;
}

std::map<std::string, std::vector<AdjustedTest>> wilcoxon_holm(
    const std::map<std::string, std::vector<PairedSample>>& families) {
  std::map<std::string, std::vector<AdjustedTest>> out;
  for (const auto& [family, samples] : families) {
    auto& tests = out[family];
    std::vector<double> raw;
    for (const auto& s : samples) {
      tests.push_back({s.label, wilcoxon_signed_rank(s.x, s.y), 1.0});
      raw.push_back(tests.back().test.p);
    }
    const auto adj = holm_adjust(raw);
    for (std::size_t i = 0; i < tests.size(); ++i) tests[i].p_adjusted = adj[i];
  }
  return out;
}

}  // namespace socsim
