#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gsf/cluster_tree.hpp"
#include "gsf/householder.hpp"

namespace gsf {

/// Multi-indices of total degree <= max_degree in graded lexicographic order:
/// by degree, then descending in the leading components.
class MultiIndexSet {
 public:
  MultiIndexSet() = default;
  MultiIndexSet(Index dim, Index max_degree);

  Index dim() const { return dim_; }
  Index max_degree() const { return max_degree_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  const std::vector<int> &operator[](Index k) const { return indices_[k]; }
  Index degree(Index k) const;

 private:
  Index dim_ = 0;
  Index max_degree_ = 0;
  std::vector<std::vector<int>> indices_;
};

/// Binomial(s + q, q).
Index polynomial_space_dim(Index dim, Index max_degree);

/// Entry (alpha, i) = x_i^alpha for the columns x_i of `points`.
Matrix moment_matrix(const Matrix &points, const MultiIndexSet &mis);

/// Two-scale filters of one cluster.
struct NodeFilters {
  HouseholderQR qr;
  Index num_inputs = 0;
  Index num_scaling = 0;
  Index num_samplets = 0;
  /// Moments of the cluster's scaling distributions, m_s x num_scaling.
  Matrix moments_phi;

  Matrix q_phi() const { return qr.q().leftCols(num_scaling); }
  Matrix q_psi() const { return qr.q().rightCols(num_samplets); }
};

/// QR of the transposed child moment matrix (m_s x n).
NodeFilters compute_filters(const Matrix &child_moments, const MultiIndexSet &mis,
                            bool fix_signs = true);

/// Center plus uniform scale mapping a patch's bounding box into [-1, 1]^q.
struct PatchFrame {
  Vector center;
  Scalar scale = 1;

  static PatchFrame fit(const Matrix &points);
  Matrix apply(const Matrix &points) const;
};

struct SampletOptions {
  /// s + 1.
  Index vanishing_moments = 1;
  /// 0 selects 2 * m_s.
  Index leaf_capacity = 0;
  /// Off only for fault injection.
  bool fix_qr_signs = true;
};

/// Samplet basis of one embedded patch. Coefficient layout: the root's
/// scaling coefficients first, then every node's samplets in breadth-first
/// node order.
class SampletTree {
 public:
  SampletTree() = default;

  /// `coords` is q x N_r (embedding coordinates, column = local vertex).
  static SampletTree build(const Matrix &coords, const SampletOptions &options);

  Index size() const { return tree_.num_points(); }
  const ClusterTree &cluster_tree() const { return tree_; }
  const MultiIndexSet &multi_indices() const { return mis_; }
  const PatchFrame &frame() const { return frame_; }
  /// Patch-normalized coordinates, q x N_r, column = local vertex.
  const Matrix &normalized_points() const { return points_; }
  const NodeFilters &filters(Index node) const { return filters_[node]; }
  Index num_root_scaling() const { return filters_.front().num_scaling; }
  /// Position of the node's first samplet coefficient.
  Index samplet_offset(Index node) const { return samplet_offset_[node]; }

  /// Values in local vertex order -> coefficients.
  void forward(std::span<const Scalar> values, std::span<Scalar> coeffs) const;
  void inverse(std::span<const Scalar> coeffs, std::span<Scalar> values) const;

  /// Visits nodes bottom-up with the explicit weight vectors of the node's
  /// scaling distributions and samplets. Row i of both matrices refers to the
  /// local vertex permutation()[node.start + i].
  using BasisVisitor =
      std::function<void(Index node, const Matrix &scaling_weights, const Matrix &samplet_weights)>;
  void visit_basis(const BasisVisitor &visit) const;

  /// Explicit N_r x N_r transform (row = basis element in coefficient layout).
  Matrix dense_transform() const;

 private:
  ClusterTree tree_;
  MultiIndexSet mis_;
  PatchFrame frame_;
  Matrix points_;
  std::vector<NodeFilters> filters_;
  std::vector<Index> samplet_offset_;
  std::vector<Index> scaling_offset_;
  Index scaling_buffer_size_ = 0;
};

enum class CoefficientKind { scaling, samplet };

struct CoefficientTag {
  Index patch = 0;
  Index node = 0;
  Index level = 0;
  CoefficientKind kind = CoefficientKind::scaling;
  /// Index among the node's scaling or samplet coefficients.
  Index local_index = 0;
};

/// Per-patch samplet trees; coefficients are laid out patch by patch.
class SampletForest {
 public:
  SampletForest() = default;

  /// patch_vertices[r] lists the global vertex ids of patch r (local order);
  /// coords[r] is the matching q x N_r embedding.
  static SampletForest build(const std::vector<std::vector<Index>> &patch_vertices,
                             const std::vector<Matrix> &coords, Index num_vertices,
                             const SampletOptions &options);

  Index num_vertices() const { return num_vertices_; }
  Index num_patches() const { return static_cast<Index>(trees_.size()); }
  const SampletTree &tree(Index r) const { return trees_[r]; }
  const std::vector<Index> &patch_vertices(Index r) const { return patch_vertices_[r]; }
  Index patch_offset(Index r) const { return patch_offset_[r]; }
  const SampletOptions &options() const { return options_; }

  Vector forward(std::span<const Scalar> signal) const;
  Vector inverse(std::span<const Scalar> coeffs) const;

  std::vector<CoefficientTag> tags() const;

 private:
  Index num_vertices_ = 0;
  SampletOptions options_;
  std::vector<SampletTree> trees_;
  std::vector<std::vector<Index>> patch_vertices_;
  std::vector<Index> patch_offset_;
};

struct CoefficientVector {
  Vector values;
  std::vector<CoefficientTag> tags;
};

CoefficientVector forward_transform(const SampletForest &forest, std::span<const Scalar> signal);
std::vector<Scalar> inverse_transform(const SampletForest &forest, const CoefficientVector &coeffs);

struct LevelDecay {
  Index level = 0;
  Scalar max_abs = 0;
  Index count = 0;
};

/// Largest samplet coefficient per tree level across the forest.
std::vector<LevelDecay> decay_report(const SampletForest &forest, const CoefficientVector &coeffs);

}  // namespace gsf
