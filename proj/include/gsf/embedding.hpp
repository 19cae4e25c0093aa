#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsf/graph.hpp"

namespace gsf {

struct LandmarkSet {
  std::vector<Index> ids;

  Index size() const { return static_cast<Index>(ids.size()); }
};

/// Landmark Isomap coordinates of one patch.
struct PatchEmbedding {
  /// q x N_r, column i holds the coordinates of local vertex i.
  Matrix coords;
  LandmarkSet landmarks;
  /// Spectrum of the landmark Gram matrix, descending.
  Vector eigenvalues;
  Scalar lost_energy = 0;
  /// Set when one of the leading q eigenvalues is not positive.
  bool degenerate = false;

  Index dim() const { return coords.rows(); }
  Index size() const { return coords.cols(); }
};

/// Greedy farthest-point landmarks; the walk starts from vertex seed mod N_r.
LandmarkSet select_landmarks_maxmin(const WeightedGraph &patch, Index num_landmarks,
                                    std::uint64_t seed);

PatchEmbedding landmark_isomap(const WeightedGraph &patch, const LandmarkSet &landmarks, Index dim);

/// Fraction of the positive spectrum beyond the leading `dim` eigenvalues.
Scalar lost_energy(std::span<const Scalar> eigenvalues_desc, Index dim);

Scalar forest_lost_energy(std::span<const Scalar> per_patch);

/// Eigen pairs of a symmetric matrix, eigenvalues descending; each eigenvector
/// is flipped so its largest-magnitude entry (lowest index on ties) is positive.
void symmetric_eigen_descending(const Matrix &sym, Vector &values, Matrix &vectors);

}  // namespace gsf
