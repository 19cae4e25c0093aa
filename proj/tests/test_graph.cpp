#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <queue>
#include <random>

#include "gsf/graph.hpp"
#include "gsf/io.hpp"

using namespace gsf;

namespace {

PointCloud random_cloud(Index d, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  PointCloud c;
  c.points.resize(d, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < d; ++i) c.points(i, j) = u(rng);
  return c;
}

WeightedGraph random_graph(Index n, double p_edge, std::uint64_t seed, bool connect) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<EdgeTriple> edges;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      if ((connect && b == a + 1) || u(rng) < p_edge) edges.push_back({a, b, 0.1 + u(rng)});
  return WeightedGraph::from_edges(n, edges);
}

// Plain O(n^3) all-pairs shortest paths.
std::vector<std::vector<double>> floyd_warshall(const WeightedGraph &g) {
  const Index n = g.num_vertices();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInfinity));
  for (Index v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (const auto &e : g.neighbors(v)) d[v][e.to] = std::min(d[v][e.to], e.weight);
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

Index bfs_component_count(const WeightedGraph &g) {
  std::vector<char> seen(g.num_vertices(), 0);
  Index count = 0;
  for (Index s = 0; s < g.num_vertices(); ++s) {
    if (seen[s]) continue;
    ++count;
    std::queue<Index> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (const auto &e : g.neighbors(u))
        if (!seen[e.to]) {
          seen[e.to] = 1;
          q.push(e.to);
        }
    }
  }
  return count;
}

void check_symmetric(const WeightedGraph &g) {
  for (Index u = 0; u < g.num_vertices(); ++u) {
    const auto nb = g.neighbors(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (k > 0) CHECK(nb[k - 1].to < nb[k].to);
      CHECK(nb[k].to != u);
      bool found = false;
      for (const auto &back : g.neighbors(nb[k].to))
        if (back.to == u) {
          found = true;
          CHECK(back.weight == nb[k].weight);
        }
      CHECK(found);
    }
  }
}

}  // namespace

TEST_CASE("from_edges validates its input") {
  const std::vector<EdgeTriple> self{{0, 0, 1.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, self), std::invalid_argument);
  const std::vector<EdgeTriple> dup{{0, 1, 1.0}, {1, 0, 1.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, dup), std::invalid_argument);
  const std::vector<EdgeTriple> neg{{0, 1, -1.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, neg), std::invalid_argument);
  const std::vector<EdgeTriple> range{{0, 2, 1.0}};
  CHECK_THROWS_AS(WeightedGraph::from_edges(2, range), std::invalid_argument);
}

TEST_CASE("epsilon graph on the unit square corners") {
  PointCloud c;
  c.points.resize(2, 4);
  c.points << 0, 1, 0, 1, 0, 0, 1, 1;
  const auto res = build_epsilon_graph(c, 1.1);
  CHECK(res.graph.num_edges() == 4);
  for (const auto &e : res.graph.edge_list()) CHECK(e.weight == 1.0);
  CHECK(res.duplicate_pairs == 0);
}

TEST_CASE("epsilon graph on spaced collinear points has no edges") {
  PointCloud c;
  c.points.resize(1, 3);
  c.points << 0, 1, 2;
  CHECK(build_epsilon_graph(c, 0.5).graph.num_edges() == 0);
}

TEST_CASE("epsilon graph rejects nonpositive epsilon and empty clouds") {
  const PointCloud c = random_cloud(2, 5, 1);
  CHECK_THROWS_AS(build_epsilon_graph(c, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_epsilon_graph(c, -1.0), std::invalid_argument);
  PointCloud empty;
  empty.points.resize(2, 0);
  CHECK_THROWS_AS(build_epsilon_graph(empty, 1.0), std::invalid_argument);
}

TEST_CASE("duplicate points produce no edge and are counted") {
  PointCloud c;
  c.points.resize(2, 3);
  c.points << 0, 0, 0.5, 0, 0, 0;
  const auto res = build_epsilon_graph(c, 1.0);
  CHECK(res.duplicate_pairs == 1);
  CHECK(res.graph.num_edges() == 2);
  CHECK(res.graph.degree(0) == 1);
  CHECK(res.graph.degree(2) == 2);
}

TEST_CASE("grid epsilon graph equals the brute force construction") {
  struct Case {
    Index d, n;
    double eps;
  };
  for (const Case c : {Case{2, 20, 0.3}, Case{2, 2000, 0.05}, Case{3, 1500, 0.12}, Case{1, 500, 0.01},
                       Case{12, 400, 0.9}, Case{5, 1000, 0.4}}) {
    CAPTURE(c.d);
    CAPTURE(c.n);
    const PointCloud cloud = random_cloud(c.d, c.n, 17 + c.d);
    const auto grid = build_epsilon_graph(cloud, c.eps);
    const auto brute = build_epsilon_graph_bruteforce(cloud, c.eps);
    CHECK(grid.graph == brute.graph);
    CHECK(grid.duplicate_pairs == brute.duplicate_pairs);
    check_symmetric(grid.graph);
  }
}

TEST_CASE("grid epsilon graph handles low-dimensional data in high ambient dimension") {
  // A flat sheet in R^30 plus a few exact duplicates.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  Matrix basis(30, 2);
  for (Index i = 0; i < 30; ++i) basis(i, 0) = g(rng), basis(i, 1) = g(rng);
  const PointCloud flat = random_cloud(2, 1200, 9);
  PointCloud c;
  c.points = basis * flat.points;
  c.points.col(7) = c.points.col(3);
  c.points.col(11) = c.points.col(3);
  const auto grid = build_epsilon_graph(c, 0.6);
  const auto brute = build_epsilon_graph_bruteforce(c, 0.6);
  CHECK(grid.graph == brute.graph);
  CHECK(grid.duplicate_pairs == 3);
}

TEST_CASE("edges exactly at distance epsilon are kept") {
  PointCloud c;
  c.points.resize(1, 3);
  c.points << 0, 0.25, 0.5;
  const auto res = build_epsilon_graph(c, 0.25);
  CHECK(res.graph.num_edges() == 2);
  CHECK(res.graph == build_epsilon_graph_bruteforce(c, 0.25).graph);
}

TEST_CASE("dijkstra basic cases") {
  const std::vector<EdgeTriple> path{{0, 1, 1.0}, {1, 2, 1.0}};
  const auto g = WeightedGraph::from_edges(3, path);
  CHECK(dijkstra(g, 0) == std::vector<double>{0, 1, 2});

  const std::vector<EdgeTriple> two{{0, 1, 1.0}, {2, 3, 1.0}};
  const auto d = dijkstra(WeightedGraph::from_edges(4, two), 0);
  CHECK(d[1] == 1.0);
  CHECK(std::isinf(d[2]));
  CHECK(std::isinf(d[3]));
  CHECK_THROWS(dijkstra(g, 3));
}

TEST_CASE("dijkstra matches Floyd-Warshall on random graphs") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_graph(50, 0.08, seed, seed % 2 == 1);
    const auto fw = floyd_warshall(g);
    for (Index s = 0; s < 50; ++s) {
      const auto d = dijkstra(g, s);
      for (Index v = 0; v < 50; ++v) {
        if (std::isinf(fw[s][v])) {
          CHECK(std::isinf(d[v]));
        } else {
          CHECK(d[v] == doctest::Approx(fw[s][v]).epsilon(1e-12));
        }
      }
      for (Index u = 0; u < 50; ++u)
        for (const auto &e : g.neighbors(u))
          if (!std::isinf(d[u])) CHECK(d[e.to] <= d[u] + e.weight);
    }
  }
}

TEST_CASE("connected components") {
  CHECK(connected_components(WeightedGraph::from_edges(1, {})) == std::vector<Index>{0});
  const std::vector<EdgeTriple> tri{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
  const auto g = WeightedGraph::from_edges(6, tri);
  CHECK(connected_components(g) == std::vector<Index>{0, 0, 0, 1, 1, 1});
  CHECK_FALSE(is_connected(g));

  // Labels are numbered by smallest contained vertex.
  const std::vector<EdgeTriple> mixed{{0, 3, 1}, {1, 2, 1}};
  CHECK(connected_components(WeightedGraph::from_edges(4, mixed)) == std::vector<Index>{0, 1, 1, 0});

  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = random_graph(60, 0.02, seed, false);
    const auto labels = connected_components(r);
    CHECK(count_components(labels) == bfs_component_count(r));
    for (Index u = 0; u < 60; ++u)
      for (const auto &e : r.neighbors(u)) CHECK(labels[u] == labels[e.to]);
  }
}

TEST_CASE("induced subgraph keeps internal edges with local ids") {
  const std::vector<EdgeTriple> e{{0, 1, 1.5}, {1, 2, 2.5}, {2, 3, 3.5}, {0, 3, 4.5}};
  const auto g = WeightedGraph::from_edges(4, e);
  const std::vector<Index> keep{1, 2, 3};
  const auto sub = g.induced_subgraph(keep);
  CHECK(sub.num_vertices() == 3);
  CHECK(sub.num_edges() == 2);
  CHECK(sub.neighbors(0)[0].to == 1);
  CHECK(sub.neighbors(0)[0].weight == 2.5);
}

TEST_CASE("graph text format round-trips losslessly") {
  const PointCloud cloud = random_cloud(3, 300, 4);
  const auto g = build_epsilon_graph(cloud, 0.2).graph;
  const std::string text = io::graph_to_string(g);
  CHECK(io::graph_from_string(text) == g);
  CHECK(io::graph_to_string(io::graph_from_string(text)) == text);

  const auto dir = std::filesystem::temp_directory_path() / "gsf_test_graph";
  io::save_graph(dir / "g.txt", g);
  CHECK(io::load_graph(dir / "g.txt") == g);
  io::save_point_cloud(dir / "c.csv", cloud);
  CHECK(io::load_point_cloud(dir / "c.csv").points == cloud.points);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed text inputs are rejected") {
  CHECK_THROWS(io::graph_from_string("3 1\n0 5 1.0\n"));
  CHECK_THROWS(io::graph_from_string("3 2\n0 1 1.0\n"));
  CHECK_THROWS(io::graph_from_string("2 1\n0 1 abc\n"));
  CHECK_THROWS(io::point_cloud_from_string("1,2\n3\n"));
  CHECK_THROWS(io::point_cloud_from_string(""));
}
