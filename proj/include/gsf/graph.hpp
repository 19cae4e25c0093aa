#pragma once

#include <span>
#include <vector>

#include "gsf/types.hpp"

namespace gsf {

/// Ambient point cloud, one point per column (d x N).
struct PointCloud {
  Matrix points;

  Index size() const { return points.cols(); }
  Index dim() const { return points.rows(); }
};

struct Edge {
  Index to;
  Scalar weight;

  friend bool operator==(const Edge &, const Edge &) = default;
};

struct EdgeTriple {
  Index u;
  Index v;
  Scalar weight;
};

/// Undirected graph with nonnegative distance weights, stored as CSR with
/// neighbor lists sorted by id. Immutable after construction.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Builds from undirected edges. Each pair may appear once in either
  /// orientation; self loops and duplicates are rejected.
  static WeightedGraph from_edges(Index n, std::span<const EdgeTriple> edges);

  Index num_vertices() const { return n_; }
  Index num_edges() const { return static_cast<Index>(adjacency_.size()) / 2; }

  std::span<const Edge> neighbors(Index v) const {
    return {adjacency_.data() + offsets_[v],
            adjacency_.data() + offsets_[v + 1]};
  }
  Index degree(Index v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Edges with u < v, ordered by (u, v).
  std::vector<EdgeTriple> edge_list() const;

  /// Subgraph induced by `vertices` (local id i <-> vertices[i]).
  WeightedGraph induced_subgraph(std::span<const Index> vertices) const;

  friend bool operator==(const WeightedGraph &, const WeightedGraph &) = default;

 private:
  Index n_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Edge> adjacency_;
};

struct EpsilonGraphResult {
  WeightedGraph graph;
  /// Pairs at distance zero that were dropped.
  Index duplicate_pairs = 0;
};

/// Connects every pair with 0 < |x_i - x_j| <= epsilon using a uniform grid
/// over the leading principal axes of the cloud.
EpsilonGraphResult build_epsilon_graph(const PointCloud &cloud, Scalar epsilon);

/// Reference O(N^2) construction.
EpsilonGraphResult build_epsilon_graph_bruteforce(const PointCloud &cloud,
                                                  Scalar epsilon);

/// Single source shortest path distances; unreachable vertices get +inf.
std::vector<Scalar> dijkstra(const WeightedGraph &graph, Index source);

/// Component labels numbered by smallest contained vertex.
std::vector<Index> connected_components(const WeightedGraph &graph);

Index count_components(std::span<const Index> labels);

bool is_connected(const WeightedGraph &graph);

}  // namespace gsf
