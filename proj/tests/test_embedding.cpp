#include <doctest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "gsf/embedding.hpp"

using namespace gsf;

namespace {

// Cyclic Jacobi rotations; eigenvalues in descending order.
std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = (theta >= 0 ? 1 : -1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (Index i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

// Complete graph with Euclidean weights, so geodesics are Euclidean distances.
WeightedGraph complete_graph(const Matrix &pts) {
  std::vector<EdgeTriple> e;
  for (Index i = 0; i < pts.cols(); ++i)
    for (Index j = i + 1; j < pts.cols(); ++j) e.push_back({i, j, (pts.col(i) - pts.col(j)).norm()});
  return WeightedGraph::from_edges(pts.cols(), e);
}

WeightedGraph path_graph(Index n) {
  std::vector<EdgeTriple> e;
  for (Index v = 0; v + 1 < n; ++v) e.push_back({v, v + 1, 1.0});
  return WeightedGraph::from_edges(n, e);
}

LandmarkSet all_vertices(Index n) {
  LandmarkSet l;
  for (Index v = 0; v < n; ++v) l.ids.push_back(v);
  return l;
}

Matrix double_centered(const Matrix &dist) {
  const Index n = dist.rows();
  const Matrix h = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  return -0.5 * h * dist.cwiseProduct(dist) * h;
}

}  // namespace

TEST_CASE("lost energy from a spectrum") {
  const std::vector<double> single{2.0, 0.0, -1e-15};
  CHECK(lost_energy(single, 1) == 0.0);
  const std::vector<double> spec{3.0, 1.0, 0.5, -0.2};
  CHECK(lost_energy(spec, 1) == doctest::Approx(1.5 / 4.5));
  CHECK(lost_energy(spec, 3) == 0.0);
  CHECK(lost_energy(spec, 5) == 0.0);
  const std::vector<double> none{0.0, -1.0};
  CHECK(lost_energy(none, 1) == 0.0);
}

TEST_CASE("forest lost energy is the maximum over patches") {
  const std::vector<double> one{0.1};
  CHECK(forest_lost_energy(one) == 0.1);
  const std::vector<double> three{0.0, 0.3, 0.2};
  CHECK(forest_lost_energy(three) == 0.3);
  CHECK_THROWS(forest_lost_energy(std::span<const double>{}));
}

TEST_CASE("four unit-square corners lose half the energy at q = 1") {
  Matrix pts(2, 4);
  pts << 0, 1, 0, 1, 0, 0, 1, 1;
  const auto g = complete_graph(pts);
  Matrix dist(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) dist(i, j) = (pts.col(i) - pts.col(j)).norm();
  const auto oracle = jacobi_eigenvalues(double_centered(dist));
  CHECK(oracle[0] == doctest::Approx(1.0));
  CHECK(oracle[1] == doctest::Approx(1.0));
  const double expected = lost_energy(oracle, 1);
  CHECK(expected == doctest::Approx(0.5));

  const auto emb = landmark_isomap(g, all_vertices(4), 1);
  CHECK(emb.lost_energy == doctest::Approx(expected).epsilon(1e-12));
  for (Index k = 0; k < 4; ++k) CHECK(emb.eigenvalues(k) == doctest::Approx(oracle[k]).epsilon(1e-12));
}

TEST_CASE("three collinear points embed as -1, 0, 1") {
  const auto g = path_graph(3);
  const auto emb = landmark_isomap(g, all_vertices(3), 1);
  // Ties in magnitude resolve to the lower index being positive.
  CHECK(emb.coords(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(emb.coords(0, 1)) < 1e-12);
  CHECK(emb.coords(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(emb.lost_energy < 1e-14);
  CHECK_FALSE(emb.degenerate);

  // B y = lambda y for the computed column.
  Matrix dist(3, 3);
  dist << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Matrix b = double_centered(dist);
  const Vector y = emb.coords.row(0).transpose();
  CHECK((b * y - emb.eigenvalues(0) * y).norm() < 1e-12);
}

TEST_CASE("collinear points at q = 2 give a zero column and a degeneracy flag") {
  const auto emb = landmark_isomap(path_graph(5), all_vertices(5), 2);
  CHECK(emb.degenerate);
  CHECK(emb.coords.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(emb.coords.allFinite());
}

TEST_CASE("two landmarks at distance d sit at plus and minus d/2") {
  const std::vector<EdgeTriple> e{{0, 1, 0.75}, {1, 2, 0.5}, {2, 3, 1.25}};
  const auto g = WeightedGraph::from_edges(4, e);
  LandmarkSet l;
  l.ids = {0, 3};
  const auto emb = landmark_isomap(g, l, 1);
  const double d = 2.5;
  CHECK(std::abs(emb.coords(0, 0)) == doctest::Approx(d / 2).epsilon(1e-12));
  CHECK(emb.coords(0, 3) == doctest::Approx(-emb.coords(0, 0)).epsilon(1e-12));
  // Vertices on the geodesic between the landmarks interpolate linearly.
  CHECK(std::abs(emb.coords(0, 1) - emb.coords(0, 0)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("Euclidean-realizable geodesics are reproduced exactly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix pts(2, 40);
  for (Index j = 0; j < 40; ++j) pts(0, j) = u(rng), pts(1, j) = u(rng);
  const auto g = complete_graph(pts);
  const auto landmarks = select_landmarks_maxmin(g, 8, 3);
  const auto emb = landmark_isomap(g, landmarks, 2);
  CHECK(emb.lost_energy < 1e-12);
  // Pairwise distances over all vertices, which includes the triangulated ones.
  for (Index i = 0; i < 40; ++i)
    for (Index j = i + 1; j < 40; ++j) {
      const double truth = (pts.col(i) - pts.col(j)).norm();
      CHECK(std::abs((emb.coords.col(i) - emb.coords.col(j)).norm() - truth) <= 1e-8 * truth);
    }
  // Landmark block is centered and signs follow the convention.
  Matrix lm(2, 8);
  for (Index k = 0; k < 8; ++k) lm.col(k) = emb.coords.col(landmarks.ids[k]);
  for (Index r = 0; r < 2; ++r) {
    CHECK(std::abs(lm.row(r).mean()) < 1e-9 * lm.row(r).cwiseAbs().maxCoeff());
    Index arg = 0;
    for (Index k = 1; k < 8; ++k)
      if (std::abs(lm(r, k)) > std::abs(lm(r, arg))) arg = k;
    CHECK(lm(r, arg) > 0);
  }
}

TEST_CASE("noiseless 20 x 20 grid embeds within 2 percent after Procrustes alignment") {
  const Index side = 20;
  PointCloud cloud;
  cloud.points.resize(2, side * side);
  for (Index i = 0; i < side; ++i)
    for (Index j = 0; j < side; ++j) cloud.points.col(i * side + j) << i / 19.0, j / 19.0;
  const auto g = build_epsilon_graph(cloud, 2.3 / 19.0).graph;
  const auto emb = landmark_isomap(g, select_landmarks_maxmin(g, 40, 1), 2);

  const Index n = side * side;
  const Matrix x = cloud.points.colwise() - cloud.points.rowwise().mean();
  const Matrix y = emb.coords.colwise() - emb.coords.rowwise().mean();
  Eigen::JacobiSVD<Matrix> svd(x * y.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix rot = svd.matrixU() * svd.matrixV().transpose();
  const double rms = std::sqrt((rot * y - x).squaredNorm() / n);
  CHECK(rms <= 0.02 * std::sqrt(2.0));
}

TEST_CASE("MaxMin landmark selection") {
  const auto path = path_graph(5);
  const auto two = select_landmarks_maxmin(path, 2, 0);
  CHECK(two.ids == std::vector<Index>{4, 0});
  CHECK(select_landmarks_maxmin(path, 5, 2).size() == 5);
  CHECK_THROWS(select_landmarks_maxmin(path, 6, 0));
  CHECK_THROWS(select_landmarks_maxmin(path, 0, 0));
  const std::vector<EdgeTriple> split{{0, 1, 1.0}, {2, 3, 1.0}};
  CHECK_THROWS(select_landmarks_maxmin(WeightedGraph::from_edges(4, split), 2, 0));
}

TEST_CASE("MaxMin selection equals brute-force greedy over all-pairs distances") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  PointCloud c;
  c.points.resize(2, 300);
  for (Index j = 0; j < 300; ++j) c.points(0, j) = u(rng), c.points(1, j) = u(rng);
  const auto g = build_epsilon_graph(c, 0.15).graph;
  REQUIRE(is_connected(g));
  const Index n = g.num_vertices();
  std::vector<std::vector<double>> all(n);
  for (Index v = 0; v < n; ++v) all[v] = dijkstra(g, v);

  for (std::uint64_t seed : {0ull, 7ull, 1234ull}) {
    std::vector<Index> expect;
    const Index start = static_cast<Index>(seed % n);
    Index first = 0;
    for (Index v = 1; v < n; ++v)
      if (all[start][v] > all[start][first]) first = v;
    expect.push_back(first);
    while (expect.size() < 5) {
      Index best = -1;
      double best_d = -1;
      for (Index v = 0; v < n; ++v) {
        double m = kInfinity;
        for (Index l : expect) m = std::min(m, all[l][v]);
        if (m > best_d) best_d = m, best = v;
      }
      expect.push_back(best);
    }
    CHECK(select_landmarks_maxmin(g, 5, seed).ids == expect);
  }
}

TEST_CASE("landmark_isomap argument errors") {
  const auto g = path_graph(6);
  LandmarkSet l;
  l.ids = {0, 5};
  CHECK_THROWS_AS(landmark_isomap(g, l, 2), std::invalid_argument);
  CHECK_THROWS_AS(landmark_isomap(g, l, 0), std::invalid_argument);
  l.ids = {0, 0, 5};
  CHECK_THROWS_AS(landmark_isomap(g, l, 1), std::invalid_argument);
  const std::vector<EdgeTriple> split{{0, 1, 1.0}, {2, 3, 1.0}};
  LandmarkSet l2;
  l2.ids = {0, 1};
  CHECK_THROWS(landmark_isomap(WeightedGraph::from_edges(4, split), l2, 1));
}

TEST_CASE("symmetric eigendecomposition agrees with the Jacobi oracle") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0, 1);
  Matrix a(12, 12);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) a(i, j) = nd(rng);
  const Matrix sym = a + a.transpose();
  Vector values;
  Matrix vectors;
  symmetric_eigen_descending(sym, values, vectors);
  const auto oracle = jacobi_eigenvalues(sym);
  for (Index k = 0; k < 12; ++k) CHECK(values(k) == doctest::Approx(oracle[k]).epsilon(1e-10));
  CHECK((sym * vectors - vectors * values.asDiagonal()).norm() < 1e-10);
}
