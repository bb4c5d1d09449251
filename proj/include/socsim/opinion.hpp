#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "socsim/common.hpp"
#include "socsim/document.hpp"

namespace socsim {

enum class Topology { ScaleFree, SmallWorld, Random };

Topology topology_from_string(const std::string& s);
std::string to_string(Topology);

struct GraphParams {
  int m = 2;            // scale_free: edges per new node
  int ring_degree = 4;  // small_world: even lattice degree
  double rewire = 0.1;  // small_world
  double p = 0.2;       // random
};

/// Undirected simple graph on nodes 0..n-1.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, sorted
  std::vector<std::vector<int>> adj;       // ascending

  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges);
  bool connected() const;
  int degree(int i) const { return static_cast<int>(adj[static_cast<std::size_t>(i)].size()); }
  bool operator==(const Graph& o) const { return n == o.n && edges == o.edges; }
};

/// One draw of the named construction; may be disconnected.
Graph generate_graph_once(Topology kind, int n, const GraphParams& params, std::uint64_t seed);

/// Connected graph: redraws with seed+1, seed+2, ... (at most 100 attempts).
/// Throws ConfigError for infeasible parameters.
Graph generate_graph(Topology kind, int n, const GraphParams& params, std::uint64_t seed);

struct BeliefGraph {
  Graph graph;
  std::vector<AgentId> ids;  // node i is ids[i]
  Eigen::VectorXd beliefs;
  double b_min = 1.0;
  double b_max = 10.0;
  Topology kind = Topology::ScaleFree;

  int index_of(const AgentId& id) const;
};

struct BeliefUpdate {
  double old_value = 0.0;
  double value = 0.0;
  double delta = 0.0;
  bool clamped = false;
};

BeliefUpdate set_belief(BeliefGraph& g, int node, double value);

/// First number in an answer ("I'd say 6.5/10" -> 6.5), or nullopt.
std::optional<double> parse_belief(std::string_view text);

enum class ExposureKind { Similarity, Opposing, Random };

ExposureKind exposure_from_string(const std::string& s);
std::string to_string(ExposureKind);

/// Neighbor node indices. Similarity takes the k nearest beliefs, opposing the
/// k farthest (ties by ascending id); random samples without replacement.
std::vector<int> select_exposure(const BeliefGraph& g, int node, ExposureKind kind, int k, std::uint64_t seed);

struct BeliefTrajectory {
  std::vector<Eigen::VectorXd> snapshots;  // initial state first
  struct Step {
    int episode;
    int node;
    double delta;
  };
  std::vector<Step> steps;
};

std::string edge_list_text(const Graph& g, const std::vector<AgentId>& ids);
/// episode,<id>,<id>,... one row per snapshot.
std::string beliefs_csv(const BeliefTrajectory& t, const std::vector<AgentId>& ids);

}  // namespace socsim
