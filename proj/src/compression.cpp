#include "gsf/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "gsf/io.hpp"

namespace gsf {

namespace {

void check_epsilon(Scalar epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon must lie in (0, 1)");
}

void check_length(const SampletForest &forest, std::span<const Scalar> coeffs) {
  if (static_cast<Index>(coeffs.size()) != forest.num_vertices())
    throw std::invalid_argument("coefficient length does not match the forest");
}

}  // namespace

EnergyTree node_energies(const SampletForest &forest, std::span<const Scalar> coeffs) {
  check_length(forest, coeffs);
  EnergyTree e;
  const Index p = forest.num_patches();
  e.own.resize(p);
  e.subtree.resize(p);
  for (Index r = 0; r < p; ++r) {
    const auto &tree = forest.tree(r);
    const auto &nodes = tree.cluster_tree().nodes();
    const Scalar *c = coeffs.data() + forest.patch_offset(r);
    auto &own = e.own[r];
    auto &sub = e.subtree[r];
    own.assign(nodes.size(), 0);
    sub.assign(nodes.size(), 0);
    for (Index k = 0; k < tree.num_root_scaling(); ++k) own[0] += c[k] * c[k];
    for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t) {
      const Index off = tree.samplet_offset(t);
      for (Index k = 0; k < tree.filters(t).num_samplets; ++k) own[t] += c[off + k] * c[off + k];
    }
    for (Index t = static_cast<Index>(nodes.size()) - 1; t >= 0; --t) {
      sub[t] += own[t];
      if (nodes[t].parent >= 0) sub[nodes[t].parent] += sub[t];
    }
  }
  return e;
}

std::vector<Scalar> modified_energies(const ClusterTree &tree, std::span<const Scalar> subtree_energy) {
  const auto &nodes = tree.nodes();
  std::vector<Scalar> mod(nodes.size(), 0);
  mod[0] = subtree_energy[0];
  for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t) {
    if (nodes[t].is_leaf()) continue;
    Scalar child_sum = 0;
    for (Index c : nodes[t].children) child_sum += subtree_energy[c];
    const Scalar denom = subtree_energy[t] + mod[t];
    const Scalar value = denom > 0 ? child_sum / denom * mod[t] : 0;
    for (Index c : nodes[t].children) mod[c] = value;
  }
  return mod;
}

AdaptiveTreeResult adaptive_tree_coarsen(const SampletForest &forest, std::span<const Scalar> coeffs,
                                         Scalar epsilon) {
  check_epsilon(epsilon);
  check_length(forest, coeffs);
  const EnergyTree energy = node_energies(forest, coeffs);
  const Index p = forest.num_patches();
  AdaptiveTreeResult res;
  res.sparse.strategy = Strategy::adaptive_tree;
  res.kept_nodes.resize(p);
  res.patch_nnz.assign(p, 0);
  res.patch_norm_sq.assign(p, 0);
  res.patch_kept_sq.assign(p, 0);
  for (Index r = 0; r < p; ++r) {
    const auto &tree = forest.tree(r);
    const auto &nodes = tree.cluster_tree().nodes();
    const auto &own = energy.own[r];
    const auto &sub = energy.subtree[r];
    const Scalar norm_sq = sub[0];
    const Scalar threshold = epsilon * epsilon * norm_sq;
    const auto mod = modified_energies(tree.cluster_tree(), sub);
    auto &kept = res.kept_nodes[r];
    kept.assign(nodes.size(), 0);
    kept[0] = 1;
    Scalar kept_sq = own[0];
    // Breadth-first growth; children enter all together.
    for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t) {
      if (!kept[t] || nodes[t].is_leaf()) continue;
      const bool expand = std::any_of(nodes[t].children.begin(), nodes[t].children.end(),
                                      [&](Index c) { return mod[c] > threshold; });
      if (!expand) continue;
      for (Index c : nodes[t].children) {
        kept[c] = 1;
        kept_sq += own[c];
      }
    }
    // Enforce the retained energy bound by expanding the richest frontier nodes.
    const Scalar required = (1 - epsilon * epsilon) * norm_sq;
    if (kept_sq < required) {
      using Item = std::pair<Scalar, Index>;
      auto cmp = [](const Item &a, const Item &b) {
        return a.first < b.first || (a.first == b.first && a.second > b.second);
      };
      std::priority_queue<Item, std::vector<Item>, decltype(cmp)> frontier(cmp);
      auto push = [&](Index t) {
        if (!nodes[t].is_leaf() && !kept[nodes[t].children.front()]) frontier.push({sub[t] - own[t], t});
      };
      for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t)
        if (kept[t]) push(t);
      while (kept_sq < required && !frontier.empty()) {
        const Index t = frontier.top().second;
        frontier.pop();
        for (Index c : nodes[t].children) {
          kept[c] = 1;
          kept_sq += own[c];
        }
        for (Index c : nodes[t].children) push(c);
      }
    }
    res.patch_norm_sq[r] = norm_sq;
    res.patch_kept_sq[r] = kept_sq;

    const Index base = forest.patch_offset(r);
    auto keep_range = [&](Index from, Index count) {
      for (Index k = from; k < from + count; ++k)
        if (coeffs[base + k] != 0) {
          res.sparse.kept.push_back({base + k, coeffs[base + k]});
          ++res.patch_nnz[r];
        }
    };
    keep_range(0, tree.num_root_scaling());
    for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t)
      if (kept[t]) keep_range(tree.samplet_offset(t), tree.filters(t).num_samplets);
  }
  std::sort(res.sparse.kept.begin(), res.sparse.kept.end(),
            [](const KeptCoefficient &a, const KeptCoefficient &b) { return a.position < b.position; });
  for (Scalar c : coeffs) res.sparse.total_norm_sq += c * c;
  return res;
}

SparseCoefficients norm_threshold(std::span<const Scalar> coeffs, Scalar epsilon) {
  check_epsilon(epsilon);
  SparseCoefficients out;
  out.strategy = Strategy::norm_threshold;
  std::vector<Index> order;
  for (Index k = 0; k < static_cast<Index>(coeffs.size()); ++k) {
    out.total_norm_sq += coeffs[k] * coeffs[k];
    if (coeffs[k] != 0) order.push_back(k);
  }
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    const Scalar ma = std::abs(coeffs[a]), mb = std::abs(coeffs[b]);
    return ma > mb || (ma == mb && a < b);
  });
  const Scalar required = (1 - epsilon * epsilon) * out.total_norm_sq;
  Scalar kept_sq = 0;
  for (Index k : order) {
    if (kept_sq >= required && out.total_norm_sq > 0) break;
    out.kept.push_back({k, coeffs[k]});
    kept_sq += coeffs[k] * coeffs[k];
  }
  std::sort(out.kept.begin(), out.kept.end(),
            [](const KeptCoefficient &a, const KeptCoefficient &b) { return a.position < b.position; });
  return out;
}

std::vector<Scalar> reconstruct(const SampletForest &forest, const SparseCoefficients &sparse) {
  std::vector<Scalar> dense(forest.num_vertices(), 0);
  for (const auto &k : sparse.kept) {
    if (k.position < 0 || k.position >= forest.num_vertices())
      throw std::invalid_argument("kept coefficient position out of range");
    dense[k.position] = k.value;
  }
  const Vector v = forest.inverse(dense);
  return {v.data(), v.data() + v.size()};
}

Scalar relative_error(std::span<const Scalar> original, std::span<const Scalar> approx) {
  if (original.size() != approx.size()) throw std::invalid_argument("length mismatch");
  Scalar diff = 0, norm = 0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    diff += (original[i] - approx[i]) * (original[i] - approx[i]);
    norm += original[i] * original[i];
  }
  return norm > 0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

std::string report_to_json(const std::vector<ReportRow> &rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto &r : rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["N"] = r.num_vertices;
    j["q"] = r.dim;
    j["p"] = r.patches;
    j["landmarks"] = r.landmarks;
    j["s_plus_1"] = r.s_plus_1;
    j["epsilon"] = r.epsilon;
    j["lost_energy"] = r.lost_energy;
    j["nnz_at"] = r.nnz_at;
    j["nnz_nt"] = r.nnz_nt;
    j["rel_err_at"] = r.rel_err_at;
    j["rel_err_nt"] = r.rel_err_nt;
    if (r.wall_ms_transform) j["wall_ms_transform"] = *r.wall_ms_transform;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::vector<ReportRow> report_from_json(const std::string &text) {
  const auto arr = nlohmann::json::parse(text);
  std::vector<ReportRow> rows;
  for (const auto &j : arr) {
    ReportRow r;
    r.dataset = j.at("dataset").get<std::string>();
    r.num_vertices = j.at("N").get<Index>();
    r.dim = j.at("q").get<Index>();
    r.patches = j.at("p").get<Index>();
    r.landmarks = j.at("landmarks").get<Index>();
    r.s_plus_1 = j.at("s_plus_1").get<Index>();
    r.epsilon = j.at("epsilon").get<Scalar>();
    r.lost_energy = j.at("lost_energy").get<Scalar>();
    r.nnz_at = j.at("nnz_at").get<Index>();
    r.nnz_nt = j.at("nnz_nt").get<Index>();
    r.rel_err_at = j.at("rel_err_at").get<Scalar>();
    r.rel_err_nt = j.at("rel_err_nt").get<Scalar>();
    if (j.contains("wall_ms_transform")) r.wall_ms_transform = j["wall_ms_transform"].get<Scalar>();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string report_to_csv(const std::vector<ReportRow> &rows) {
  std::string s = "lost_energy,s_plus_1,nnz_at,nnz_nt,rel_err_at,rel_err_nt\n";
  for (const auto &r : rows) {
    s += io::format_real(r.lost_energy) + "," + std::to_string(r.s_plus_1) + "," +
         std::to_string(r.nnz_at) + "," + std::to_string(r.nnz_nt) + "," +
         io::format_real(r.rel_err_at) + "," + io::format_real(r.rel_err_nt) + "\n";
  }
  return s;
}

}  // namespace gsf
