#include "gsf/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>

namespace gsf {

WeightedGraph WeightedGraph::from_edges(Index n, std::span<const EdgeTriple> edges) {
  if (n < 0) throw std::invalid_argument("negative vertex count");
  WeightedGraph g;
  g.n_ = n;
  std::vector<Index> degree(n, 0);
  for (const auto &e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v)
      throw std::invalid_argument("self loop at vertex " + std::to_string(e.u));
    if (!(e.weight >= 0) || !std::isfinite(e.weight))
      throw std::invalid_argument("edge weights must be finite and nonnegative");
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(n + 1, 0);
  for (Index v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.adjacency_.resize(g.offsets_[n]);
  std::vector<Index> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto &e : edges) {
    g.adjacency_[fill[e.u]++] = {e.v, e.weight};
    g.adjacency_[fill[e.v]++] = {e.u, e.weight};
  }
  for (Index v = 0; v < n; ++v) {
    auto first = g.adjacency_.begin() + g.offsets_[v];
    auto last = g.adjacency_.begin() + g.offsets_[v + 1];
    std::sort(first, last, [](const Edge &a, const Edge &b) { return a.to < b.to; });
    if (std::adjacent_find(first, last, [](const Edge &a, const Edge &b) {
          return a.to == b.to;
        }) != last)
      throw std::invalid_argument("duplicate edge at vertex " + std::to_string(v));
  }
  return g;
}

std::vector<EdgeTriple> WeightedGraph::edge_list() const {
  std::vector<EdgeTriple> out;
  out.reserve(num_edges());
  for (Index u = 0; u < n_; ++u)
    for (const auto &e : neighbors(u))
      if (u < e.to) out.push_back({u, e.to, e.weight});
  return out;
}

WeightedGraph WeightedGraph::induced_subgraph(std::span<const Index> vertices) const {
  std::vector<Index> local(n_, -1);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (local[vertices[i]] != -1)
      throw std::invalid_argument("repeated vertex in induced subgraph");
    local[vertices[i]] = static_cast<Index>(i);
  }
  std::vector<EdgeTriple> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (const auto &e : neighbors(vertices[i])) {
      const Index j = local[e.to];
      if (j > static_cast<Index>(i)) edges.push_back({static_cast<Index>(i), j, e.weight});
    }
  return from_edges(static_cast<Index>(vertices.size()), edges);
}

namespace {

Scalar point_distance(const Matrix &pts, Index i, Index j) {
  Scalar acc = 0;
  for (Index k = 0; k < pts.rows(); ++k) {
    const Scalar d = pts(k, i) - pts(k, j);
    acc += d * d;
  }
  return std::sqrt(acc);
}

void check_epsilon_args(const PointCloud &cloud, Scalar epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (cloud.size() < 1 || cloud.dim() < 1)
    throw std::invalid_argument("point cloud must be nonempty");
}

constexpr int kMaxGridDims = 8;
using CellKey = std::array<std::int64_t, kMaxGridDims>;

// Axes on which a grid of cell size epsilon actually separates points.
Matrix grid_axes(const PointCloud &cloud, Scalar epsilon) {
  const Index d = cloud.dim();
  const Vector mean = cloud.points.rowwise().mean();
  const Matrix centered = cloud.points.colwise() - mean;
  const Matrix cov = centered * centered.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Index k = std::min<Index>(d, kMaxGridDims);
  std::vector<Vector> axes;
  for (Index a = 0; a < k; ++a) {
    const Vector axis = eig.eigenvectors().col(d - 1 - a);
    const Eigen::RowVectorXd proj = axis.transpose() * cloud.points;
    if (proj.maxCoeff() - proj.minCoeff() > 2 * epsilon || axes.empty())
      axes.push_back(axis);
  }
  Matrix out(d, static_cast<Index>(axes.size()));
  for (std::size_t a = 0; a < axes.size(); ++a) out.col(static_cast<Index>(a)) = axes[a];
  return out;
}

}  // namespace

EpsilonGraphResult build_epsilon_graph_bruteforce(const PointCloud &cloud,
                                                  Scalar epsilon) {
  check_epsilon_args(cloud, epsilon);
  EpsilonGraphResult res;
  std::vector<EdgeTriple> edges;
  for (Index i = 0; i < cloud.size(); ++i)
    for (Index j = i + 1; j < cloud.size(); ++j) {
      const Scalar dist = point_distance(cloud.points, i, j);
      if (dist == 0) {
        ++res.duplicate_pairs;
      } else if (dist <= epsilon) {
        edges.push_back({i, j, dist});
      }
    }
  res.graph = WeightedGraph::from_edges(cloud.size(), edges);
  return res;
}

EpsilonGraphResult build_epsilon_graph(const PointCloud &cloud, Scalar epsilon) {
  check_epsilon_args(cloud, epsilon);
  const Index n = cloud.size();
  const Matrix axes = grid_axes(cloud, epsilon);
  const int k = static_cast<int>(axes.cols());
  const Matrix proj = axes.transpose() * cloud.points;
  const Vector lo = proj.rowwise().minCoeff();
  // Slightly enlarged cells so rounding never separates true neighbors by two cells.
  const Scalar cell = epsilon * (1 + 1e-9);

  std::vector<CellKey> key(n);
  for (Index i = 0; i < n; ++i) {
    CellKey c{};
    for (int a = 0; a < k; ++a)
      c[a] = static_cast<std::int64_t>(std::floor((proj(a, i) - lo(a)) / cell));
    key[i] = c;
  }
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return key[a] < key[b]; });
  std::vector<CellKey> cells;
  std::vector<Index> cell_start;
  for (Index r = 0; r < n; ++r) {
    if (r == 0 || key[order[r]] != key[order[r - 1]]) {
      cells.push_back(key[order[r]]);
      cell_start.push_back(r);
    }
  }
  cell_start.push_back(n);
  const Index num_cells = static_cast<Index>(cells.size());

  Index num_offsets = 1;
  for (int a = 0; a < k; ++a) num_offsets *= 3;

  std::vector<std::vector<Edge>> found(n);
  std::vector<Index> dup_count(n, 0);
  const Scalar slack = epsilon * epsilon * (1 + 1e-8);

#pragma omp parallel for schedule(dynamic, 16)
  for (Index c = 0; c < num_cells; ++c) {
    std::vector<Index> nbr_cells;
    for (Index off = 0; off < num_offsets; ++off) {
      CellKey probe = cells[c];
      Index rem = off;
      for (int a = 0; a < k; ++a) {
        probe[a] += rem % 3 - 1;
        rem /= 3;
      }
      auto it = std::lower_bound(cells.begin(), cells.end(), probe);
      if (it != cells.end() && *it == probe) nbr_cells.push_back(it - cells.begin());
    }
    for (Index r = cell_start[c]; r < cell_start[c + 1]; ++r) {
      const Index i = order[r];
      for (Index nc : nbr_cells)
        for (Index t = cell_start[nc]; t < cell_start[nc + 1]; ++t) {
          const Index j = order[t];
          if (j <= i) continue;
          Scalar pd = 0;
          for (int a = 0; a < k; ++a) {
            const Scalar diff = proj(a, i) - proj(a, j);
            pd += diff * diff;
          }
          if (pd > slack) continue;
          const Scalar dist = point_distance(cloud.points, i, j);
          if (dist == 0) {
            ++dup_count[i];
          } else if (dist <= epsilon) {
            found[i].push_back({j, dist});
          }
        }
    }
  }

  EpsilonGraphResult res;
  std::vector<EdgeTriple> edges;
  for (Index i = 0; i < n; ++i) {
    res.duplicate_pairs += dup_count[i];
    for (const auto &e : found[i]) edges.push_back({i, e.to, e.weight});
  }
  res.graph = WeightedGraph::from_edges(n, edges);
  return res;
}

std::vector<Scalar> dijkstra(const WeightedGraph &graph, Index source) {
  const Index n = graph.num_vertices();
  if (source < 0 || source >= n) throw std::invalid_argument("source out of range");
  std::vector<Scalar> dist(n, kInfinity);
  using Item = std::pair<Scalar, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0;
  heap.push({0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto &e : graph.neighbors(u)) {
      const Scalar nd = d + e.weight;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        heap.push({nd, e.to});
      }
    }
  }
  return dist;
}

std::vector<Index> connected_components(const WeightedGraph &graph) {
  const Index n = graph.num_vertices();
  std::vector<Index> label(n, -1);
  std::vector<Index> stack;
  Index next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[s] != -1) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (const auto &e : graph.neighbors(u))
        if (label[e.to] == -1) {
          label[e.to] = next;
          stack.push_back(e.to);
        }
    }
    ++next;
  }
  return label;
}

Index count_components(std::span<const Index> labels) {
  Index k = 0;
  for (Index l : labels) k = std::max(k, l + 1);
  return k;
}

bool is_connected(const WeightedGraph &graph) {
  if (graph.num_vertices() == 0) return true;
  const auto labels = connected_components(graph);
  return count_components(labels) == 1;
}

}  // namespace gsf
