#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsf/samplets.hpp"

namespace gsf {

/// Per patch, per cluster node: own coefficient energy and subtree energy.
struct EnergyTree {
  std::vector<std::vector<Scalar>> own;
  std::vector<std::vector<Scalar>> subtree;
};

EnergyTree node_energies(const SampletForest &forest, std::span<const Scalar> coeffs);

/// Modified energies used to steer tree growth in adaptive coarsening.
std::vector<Scalar> modified_energies(const ClusterTree &tree, std::span<const Scalar> subtree_energy);

enum class Strategy { adaptive_tree, norm_threshold };

struct KeptCoefficient {
  Index position;
  Scalar value;
};

/// Retained nonzero coefficients, ascending by position.
struct SparseCoefficients {
  std::vector<KeptCoefficient> kept;
  Scalar total_norm_sq = 0;
  Strategy strategy = Strategy::norm_threshold;

  Index nnz() const { return static_cast<Index>(kept.size()); }
};

struct AdaptiveTreeResult {
  SparseCoefficients sparse;
  /// Per patch, per node: membership in the retained subtree.
  std::vector<std::vector<char>> kept_nodes;
  /// Per patch: nonzero coefficients kept and the patch's squared norm.
  std::vector<Index> patch_nnz;
  std::vector<Scalar> patch_norm_sq;
  std::vector<Scalar> patch_kept_sq;
};

AdaptiveTreeResult adaptive_tree_coarsen(const SampletForest &forest, std::span<const Scalar> coeffs,
                                         Scalar epsilon);

/// Fewest largest-modulus coefficients whose squared norm reaches
/// (1 - epsilon^2) of the total; ties prefer the lower position.
SparseCoefficients norm_threshold(std::span<const Scalar> coeffs, Scalar epsilon);

std::vector<Scalar> reconstruct(const SampletForest &forest, const SparseCoefficients &sparse);

/// |f - g| / |f|, or |f - g| when f vanishes.
Scalar relative_error(std::span<const Scalar> original, std::span<const Scalar> approx);

struct ReportRow {
  std::string dataset;
  Index num_vertices = 0;
  Index dim = 0;
  Index patches = 0;
  Index landmarks = 0;
  Index s_plus_1 = 0;
  Scalar epsilon = 0;
  Scalar lost_energy = 0;
  Index nnz_at = 0;
  Index nnz_nt = 0;
  Scalar rel_err_at = 0;
  Scalar rel_err_nt = 0;
  std::optional<Scalar> wall_ms_transform;
};

std::string report_to_json(const std::vector<ReportRow> &rows);
std::vector<ReportRow> report_from_json(const std::string &text);
/// Columns lost_energy,s_plus_1,nnz_at,nnz_nt,rel_err_at,rel_err_nt.
std::string report_to_csv(const std::vector<ReportRow> &rows);

}  // namespace gsf
