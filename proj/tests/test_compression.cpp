#include <doctest.h>

#include <cmath>
#include <random>

#include "gsf/compression.hpp"

using namespace gsf;

namespace {

SampletForest single_patch_forest(Index n, Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix p(2, n);
  for (Index j = 0; j < n; ++j) p(0, j) = u(rng), p(1, j) = u(rng);
  std::vector<std::vector<Index>> verts(1);
  for (Index v = 0; v < n; ++v) verts[0].push_back(v);
  SampletOptions o;
  o.vanishing_moments = m;
  return SampletForest::build(verts, {p}, n, o);
}

SampletForest two_patch_forest(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix a(2, 250), b(2, 150);
  for (Index j = 0; j < 250; ++j) a(0, j) = u(rng), a(1, j) = u(rng);
  for (Index j = 0; j < 150; ++j) b(0, j) = u(rng), b(1, j) = u(rng);
  std::vector<std::vector<Index>> verts(2);
  for (Index v = 0; v < 400; ++v) verts[v < 250 ? 0 : 1].push_back(v);
  SampletOptions o;
  o.vanishing_moments = 2;
  return SampletForest::build(verts, {a, b}, 400, o);
}

std::vector<double> random_vector(Index n, std::uint64_t seed, double sparsity = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> v(n);
  for (auto &x : v) x = u(rng) < sparsity ? 0.0 : g(rng);
  return v;
}

double sum_sq(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

double kept_sq(const SparseCoefficients &sp) {
  double s = 0;
  for (const auto &k : sp.kept) s += k.value * k.value;
  return s;
}

// Checks the kept node set of one patch is closed under parents and
// all-or-none in children, and that its leaves tile the patch.
void check_subtree(const SampletTree &tree, const std::vector<char> &kept) {
  const auto &nodes = tree.cluster_tree().nodes();
  REQUIRE(kept.size() == nodes.size());
  CHECK(kept[0]);
  std::vector<char> covered(tree.size(), 0);
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    if (!kept[t]) continue;
    if (t > 0) CHECK(kept[nodes[t].parent]);
    Index kids = 0;
    for (Index c : nodes[t].children) kids += kept[c] ? 1 : 0;
    CHECK((kids == 0 || kids == static_cast<Index>(nodes[t].children.size())));
    if (kids == 0)
      for (Index i = nodes[t].start; i < nodes[t].end; ++i) {
        CHECK_FALSE(covered[i]);
        covered[i] = 1;
      }
  }
  for (char c : covered) CHECK(c);
}

}  // namespace

TEST_CASE("node energies") {
  const auto forest = single_patch_forest(300, 2, 1);
  const std::vector<double> zero(300, 0.0);
  const auto ez = node_energies(forest, zero);
  for (double e : ez.subtree[0]) CHECK(e == 0.0);

  const auto &tree = forest.tree(0);
  const auto &nodes = tree.cluster_tree().nodes();
  Index leaf = 0;
  for (Index t = static_cast<Index>(nodes.size()) - 1; t >= 0; --t)
    if (nodes[t].is_leaf() && tree.filters(t).num_samplets > 0) {
      leaf = t;
      break;
    }
  REQUIRE(leaf > 0);
  std::vector<double> single(300, 0.0);
  single[tree.samplet_offset(leaf)] = 3.0;
  const auto es = node_energies(forest, single);
  std::vector<char> ancestor(nodes.size(), 0);
  for (Index t = leaf; t >= 0; t = nodes[t].parent) {
    ancestor[t] = 1;
    if (t == 0) break;
  }
  for (std::size_t t = 0; t < nodes.size(); ++t) CHECK(es.subtree[0][t] == (ancestor[t] ? 9.0 : 0.0));

  const auto r = random_vector(300, 5);
  const auto er = node_energies(forest, r);
  CHECK(er.subtree[0][0] == doctest::Approx(sum_sq(r)).epsilon(1e-12));
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    double expect = er.own[0][t];
    for (Index c : nodes[t].children) expect += er.subtree[0][c];
    CHECK(er.subtree[0][t] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("modified energies follow the recursion") {
  const auto forest = single_patch_forest(400, 1, 2);
  const auto r = random_vector(400, 3);
  const auto e = node_energies(forest, r);
  const auto &tree = forest.tree(0).cluster_tree();
  const auto mod = modified_energies(tree, e.subtree[0]);
  CHECK(mod[0] == e.subtree[0][0]);
  for (std::size_t t = 0; t < tree.nodes().size(); ++t) {
    const auto &node = tree.node(static_cast<Index>(t));
    double child_sum = 0;
    for (Index c : node.children) child_sum += e.subtree[0][c];
    const double denom = e.subtree[0][t] + mod[t];
    const double expect = denom > 0 ? child_sum / denom * mod[t] : 0.0;
    for (Index c : node.children) CHECK(mod[c] == doctest::Approx(expect).epsilon(1e-14));
  }
  const std::vector<double> zero(tree.nodes().size(), 0.0);
  for (double x : modified_energies(tree, zero)) CHECK(x == 0.0);
}

TEST_CASE("norm thresholding examples") {
  std::vector<double> one(10, 0.0);
  one[6] = -2.0;
  const auto s1 = norm_threshold(one, 0.1);
  CHECK(s1.nnz() == 1);
  CHECK(s1.kept[0].position == 6);

  const std::vector<double> pair{3.0, 4.0};
  CHECK(norm_threshold(pair, 0.5).nnz() == 2);
  CHECK(norm_threshold(pair, 0.6).nnz() == 1);

  // Equal moduli: the lower position wins.
  const std::vector<double> tie{1.0, -1.0, 1.0, 0.1};
  const auto st = norm_threshold(tie, 0.9);
  REQUIRE(st.nnz() == 1);
  CHECK(st.kept[0].position == 0);

  CHECK_THROWS_AS(norm_threshold(pair, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(norm_threshold(pair, 1.0), std::invalid_argument);
}

TEST_CASE("norm thresholding equals the exhaustive best k-term choice") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Index n = 4 + static_cast<Index>(seed % 13);
    const auto v = random_vector(n, seed, 0.2);
    const double eps = 0.05 + 0.02 * static_cast<double>(seed % 20);
    const double total = sum_sq(v);
    const double bound = (1 - eps * eps) * total;
    Index best_k = n + 1;
    double best_sq = -1;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const Index k = __builtin_popcount(mask);
      double s = 0;
      for (Index i = 0; i < n; ++i)
        if (mask >> i & 1u) s += v[i] * v[i];
      if (s < bound) continue;
      if (k < best_k || (k == best_k && s > best_sq)) best_k = k, best_sq = s;
    }
    const auto sp = norm_threshold(v, eps);
    CAPTURE(seed);
    CHECK(sp.nnz() == best_k);
    CHECK(kept_sq(sp) == doctest::Approx(best_sq).epsilon(1e-12));
    CHECK(sp.total_norm_sq == doctest::Approx(total));
    for (std::size_t k = 1; k < sp.kept.size(); ++k) CHECK(sp.kept[k - 1].position < sp.kept[k].position);
  }
}

TEST_CASE("adaptive tree coarsening with only root scaling coefficients") {
  const auto forest = two_patch_forest(4);
  std::vector<double> c(400, 0.0);
  for (Index r = 0; r < 2; ++r)
    for (Index k = 0; k < forest.tree(r).num_root_scaling(); ++k) c[forest.patch_offset(r) + k] = 1.0 + k;
  const auto at = adaptive_tree_coarsen(forest, c, 0.01);
  CHECK(at.sparse.nnz() == forest.tree(0).num_root_scaling() + forest.tree(1).num_root_scaling());
  for (Index r = 0; r < 2; ++r) {
    CHECK(at.kept_nodes[r][0]);
    for (std::size_t t = 1; t < at.kept_nodes[r].size(); ++t) CHECK_FALSE(at.kept_nodes[r][t]);
  }
}

TEST_CASE("adaptive tree coarsening keeps everything for tiny epsilon") {
  const auto forest = two_patch_forest(5);
  const auto c = random_vector(400, 6);
  const auto at = adaptive_tree_coarsen(forest, c, 1e-9);
  CHECK(at.sparse.nnz() == 400);
  const auto back = reconstruct(forest, at.sparse);
  const auto orig = forest.inverse(c);
  CHECK(relative_error({orig.data(), 400}, back) <= 1e-10);
}

TEST_CASE("adaptive tree coarsening meets the energy bound with a valid subtree") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto forest = single_patch_forest(200, 1 + static_cast<Index>(seed % 3), seed);
    const auto c = random_vector(200, seed + 50, 0.8);
    for (double eps : {0.3, 0.1, 0.03}) {
      const auto at = adaptive_tree_coarsen(forest, c, eps);
      CHECK(kept_sq(at.sparse) >= (1 - eps * eps) * sum_sq(c) * (1 - 1e-12));
      check_subtree(forest.tree(0), at.kept_nodes[0]);
      const auto nt = norm_threshold(c, eps);
      CHECK(nt.nnz() <= at.sparse.nnz());
      CHECK(at.patch_kept_sq[0] == doctest::Approx(kept_sq(at.sparse)));
      CHECK(at.patch_norm_sq[0] == doctest::Approx(sum_sq(c)));
    }
  }
  CHECK_THROWS_AS(adaptive_tree_coarsen(single_patch_forest(20, 1, 1), random_vector(20, 1), 1.5),
                  std::invalid_argument);
}

TEST_CASE("reconstruction errors respect epsilon") {
  const auto forest = two_patch_forest(9);
  std::vector<double> f(400);
  for (Index v = 0; v < 400; ++v) f[v] = std::sin(0.05 * static_cast<double>(v)) + 0.1 * std::cos(0.7 * v);
  const Vector c = forest.forward(f);
  const std::span<const double> cs{c.data(), 400};
  for (double eps : {0.2, 0.05, 0.01}) {
    const auto at = adaptive_tree_coarsen(forest, cs, eps);
    const auto nt = norm_threshold(cs, eps);
    CHECK(relative_error(f, reconstruct(forest, at.sparse)) <= eps);
    CHECK(relative_error(f, reconstruct(forest, nt)) <= eps);
    CHECK(nt.nnz() <= at.sparse.nnz());
  }
  SparseCoefficients none;
  CHECK(relative_error(f, reconstruct(forest, none)) == doctest::Approx(1.0));
  const std::vector<double> zero(4, 0.0), other{3.0, 4.0, 0.0, 0.0};
  CHECK(relative_error(zero, other) == doctest::Approx(5.0));
}

TEST_CASE("report JSON and CSV") {
  ReportRow row;
  row.dataset = "unit_square";
  row.num_vertices = 10000;
  row.dim = 2;
  row.patches = 1;
  row.landmarks = 100;
  row.s_plus_1 = 3;
  row.epsilon = 0.01;
  row.lost_energy = 0.125;
  row.nnz_at = 200;
  row.nnz_nt = 150;
  row.rel_err_at = 0.009;
  row.rel_err_nt = 0.0099;
  const std::string json = report_to_json({row});
  CHECK(json.find("wall_ms_transform") == std::string::npos);
  const auto back = report_from_json(json);
  REQUIRE(back.size() == 1);
  CHECK(back[0].nnz_nt == 150);
  CHECK(back[0].lost_energy == 0.125);
  CHECK(report_to_json(back) == json);

  row.wall_ms_transform = 12.5;
  CHECK(report_to_json({row}).find("\"wall_ms_transform\": 12.5") != std::string::npos);

  const std::string csv = report_to_csv({row});
  CHECK(csv.substr(0, csv.find('\n')) == "lost_energy,s_plus_1,nnz_at,nnz_nt,rel_err_at,rel_err_nt");
  CHECK(csv.find("0.125,3,200,150,") != std::string::npos);
}
