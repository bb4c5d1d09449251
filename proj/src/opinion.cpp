#include "socsim/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <regex>
#include <set>

namespace socsim {

Topology topology_from_string(const std::string& s) {
  if (s == "scale_free") return Topology::ScaleFree;
  if (s == "small_world") return Topology::SmallWorld;
  if (s == "random") return Topology::Random;
  throw ConfigError("unknown topology '" + s + "'");
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::ScaleFree: return "scale_free";
    case Topology::SmallWorld: return "small_world";
    case Topology::Random: return "random";
  }
  return "?";
}

ExposureKind exposure_from_string(const std::string& s) {
  if (s == "similarity") return ExposureKind::Similarity;
  if (s == "opposing") return ExposureKind::Opposing;
  if (s == "random") return ExposureKind::Random;
  throw ConfigError("unknown exposure policy '" + s + "'");
}

std::string to_string(ExposureKind k) {
  switch (k) {
    case ExposureKind::Similarity: return "similarity";
    case ExposureKind::Opposing: return "opposing";
    case ExposureKind::Random: return "random";
  }
  return "?";
}

Graph Graph::from_edges(int n, std::vector<std::pair<int, int>> edges) {
  Graph g;
  g.n = n;
  for (auto& [u, v] : edges)
    if (u > v) std::swap(u, v);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  g.adj.assign(static_cast<std::size_t>(n), {});
  for (const auto& [u, v] : g.edges) {
    g.adj[static_cast<std::size_t>(u)].push_back(v);
    g.adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

bool Graph::connected() const {
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        q.push(v);
      }
  }
  return count == n;
}

namespace {

void check_params(Topology kind, int n, const GraphParams& p) {
  if (n < 3) throw ConfigError("graph needs n >= 3, got " + std::to_string(n));
  switch (kind) {
    case Topology::ScaleFree:
      if (p.m < 1 || p.m >= n)
        throw ConfigError("scale_free needs 1 <= m < n, got m=" + std::to_string(p.m) + " n=" + std::to_string(n));
      break;
    case Topology::SmallWorld:
      if (p.ring_degree < 2 || p.ring_degree % 2 != 0 || p.ring_degree >= n)
        throw ConfigError("small_world needs an even ring degree in [2, n), got " + std::to_string(p.ring_degree));
      if (p.rewire < 0.0 || p.rewire > 1.0) throw ConfigError("small_world rewire must be in [0, 1]");
      break;
    case Topology::Random:
      if (p.p <= 0.0 || p.p > 1.0) throw ConfigError("random graph needs 0 < p <= 1");
      break;
  }
}

// Preferential attachment: nodes 0..m-1 start isolated, node m joins all of
// them, every later node picks m distinct targets with probability
// proportional to degree. Yields m*(n-m) edges.
std::vector<std::pair<int, int>> scale_free(int n, int m, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> repeated;  // each node appears once per incident edge
  for (int t = 0; t < m; ++t) {
    edges.emplace_back(t, m);
    repeated.push_back(t);
    repeated.push_back(m);
  }
  for (int v = m + 1; v < n; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) targets.insert(repeated[rng.below(repeated.size())]);
    for (int t : targets) {
      edges.emplace_back(t, v);
      repeated.push_back(t);
      repeated.push_back(v);
    }
  }
  return edges;
}

std::vector<std::pair<int, int>> small_world(int n, int k, double beta, Rng& rng) {
  std::set<std::pair<int, int>> edges;
  auto key = [](int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); };
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= k / 2; ++j) edges.insert(key(i, (i + j) % n));
  if (beta > 0.0) {
    for (int j = 1; j <= k / 2; ++j) {
      for (int i = 0; i < n; ++i) {
        const auto e = key(i, (i + j) % n);
        if (!edges.count(e) || !rng.chance(beta)) continue;
        // candidates exclude i and its current neighbours
        std::vector<int> free;
        for (int w = 0; w < n; ++w)
          if (w != i && !edges.count(key(i, w))) free.push_back(w);
        if (free.empty()) continue;
        edges.erase(e);
        edges.insert(key(i, free[rng.below(free.size())]));
      }
    }
  }
  return {edges.begin(), edges.end()};
}

std::vector<std::pair<int, int>> erdos_renyi(int n, double p, Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.chance(p)) edges.emplace_back(i, j);
  return edges;
}

}  // namespace

Graph generate_graph_once(Topology kind, int n, const GraphParams& params, std::uint64_t seed) {
  check_params(kind, n, params);
  Rng rng(derive_seed(seed, {fnv1a64("graph"), static_cast<std::uint64_t>(kind)}));
  switch (kind) {
    case Topology::ScaleFree: return Graph::from_edges(n, scale_free(n, params.m, rng));
    case Topology::SmallWorld: return Graph::from_edges(n, small_world(n, params.ring_degree, params.rewire, rng));
    case Topology::Random: return Graph::from_edges(n, erdos_renyi(n, params.p, rng));
  }
  throw ConfigError("unknown topology");
}

Graph generate_graph(Topology kind, int n, const GraphParams& params, std::uint64_t seed) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto g = generate_graph_once(kind, n, params, seed + static_cast<std::uint64_t>(attempt));
    if (g.connected()) return g;
  }
  throw ConfigError("no connected " + to_string(kind) + " graph after 100 attempts; raise its density");
}

int BeliefGraph::index_of(const AgentId& id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  return it == ids.end() ? -1 : static_cast<int>(it - ids.begin());
}

BeliefUpdate set_belief(BeliefGraph& g, int node, double value) {
  BeliefUpdate u;
  u.old_value = g.beliefs[node];
  u.value = std::clamp(value, g.b_min, g.b_max);
  u.clamped = u.value != value;
  u.delta = std::abs(u.value - u.old_value);
  g.beliefs[node] = u.value;
  return u;
}

std::optional<double> parse_belief(std::string_view text) {
  static const std::regex num(R"([-+]?(\d+(\.\d*)?|\.\d+))");
  std::cmatch m;
  if (!std::regex_search(text.begin(), text.end(), m, num)) return std::nullopt;
  const double v = std::stod(m.str());
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<int> select_exposure(const BeliefGraph& g, int node, ExposureKind kind, int k, std::uint64_t seed) {
  std::vector<int> nb = g.graph.adj.at(static_cast<std::size_t>(node));
  if (nb.empty()) throw SimulationError("agent '" + g.ids[static_cast<std::size_t>(node)] + "' has no neighbours");
  const auto take = static_cast<std::size_t>(std::min<int>(k, static_cast<int>(nb.size())));
  auto by_id = [&](int a, int b) { return g.ids[static_cast<std::size_t>(a)] < g.ids[static_cast<std::size_t>(b)]; };
  if (kind == ExposureKind::Random) {
    std::sort(nb.begin(), nb.end(), by_id);
    Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) std::swap(nb[i], nb[i + rng.below(nb.size() - i)]);
    nb.resize(take);
    return nb;
  }
  const double b = g.beliefs[node];
  const bool nearest = kind == ExposureKind::Similarity;
  std::sort(nb.begin(), nb.end(), [&](int x, int y) {
    const double dx = std::abs(g.beliefs[x] - b), dy = std::abs(g.beliefs[y] - b);
    if (dx != dy) return nearest ? dx < dy : dx > dy;
    return by_id(x, y);
  });
  nb.resize(take);
  return nb;
}

std::string edge_list_text(const Graph& g, const std::vector<AgentId>& ids) {
  std::string out;
  for (const auto& [u, v] : g.edges)
    out += ids[static_cast<std::size_t>(u)] + " " + ids[static_cast<std::size_t>(v)] + "\n";
  return out;
}

std::string beliefs_csv(const BeliefTrajectory& t, const std::vector<AgentId>& ids) {
  std::string out = "episode";
  for (const auto& id : ids) out += "," + id;
  out += "\n";
  for (std::size_t e = 0; e < t.snapshots.size(); ++e) {
    out += std::to_string(e);
    for (Eigen::Index i = 0; i < t.snapshots[e].size(); ++i) out += "," + format_double(t.snapshots[e][i]);
    out += "\n";
  }
  return out;
}

}  // namespace socsim
