#include "gsf/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gsf {

LandmarkSet select_landmarks_maxmin(const WeightedGraph &patch, Index num_landmarks,
                                    std::uint64_t seed) {
  const Index n = patch.num_vertices();
  if (num_landmarks < 1 || num_landmarks > n)
    throw std::invalid_argument("landmark count must lie in [1, patch size]");
  const Index start = static_cast<Index>(seed % static_cast<std::uint64_t>(n));
  auto farthest = [n](const std::vector<Scalar> &dist, const std::vector<char> &taken) {
    Index best = -1;
    for (Index v = 0; v < n; ++v) {
      if (!std::isfinite(dist[v])) throw std::runtime_error("patch is disconnected");
      if (taken[v]) continue;
      if (best == -1 || dist[v] > dist[best]) best = v;
    }
    return best;
  };
  std::vector<char> taken(n, 0);
  LandmarkSet set;
  const auto from_start = dijkstra(patch, start);
  Index next = farthest(from_start, std::vector<char>(n, 0));
  std::vector<Scalar> mind(n, kInfinity);
  while (true) {
    set.ids.push_back(next);
    taken[next] = 1;
    if (set.size() == num_landmarks) break;
    const auto d = dijkstra(patch, next);
    for (Index v = 0; v < n; ++v) mind[v] = std::min(mind[v], d[v]);
    next = farthest(mind, taken);
  }
  return set;
}

void symmetric_eigen_descending(const Matrix &sym, Vector &values, Matrix &vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const Index n = sym.rows();
  values = eig.eigenvalues().reverse();
  vectors = eig.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < n; ++k) {
    Index arg = 0;
    for (Index i = 1; i < n; ++i)
      if (std::abs(vectors(i, k)) > std::abs(vectors(arg, k))) arg = i;
    if (vectors(arg, k) < 0) vectors.col(k) *= -1;
  }
}

Scalar lost_energy(std::span<const Scalar> eigenvalues_desc, Index dim) {
  Scalar total = 0, tail = 0;
  for (std::size_t k = 0; k < eigenvalues_desc.size(); ++k) {
    const Scalar pos = std::max<Scalar>(eigenvalues_desc[k], 0);
    total += pos;
    if (static_cast<Index>(k) >= dim) tail += pos;
  }
  return total > 0 ? tail / total : 0;
}

Scalar forest_lost_energy(std::span<const Scalar> per_patch) {
  if (per_patch.empty()) throw std::invalid_argument("no patches");
  return *std::max_element(per_patch.begin(), per_patch.end());
}

PatchEmbedding landmark_isomap(const WeightedGraph &patch, const LandmarkSet &landmarks, Index dim) {
  const Index n = patch.num_vertices();
  const Index nl = landmarks.size();
  if (dim < 1) throw std::invalid_argument("embedding dimension must be positive");
  if (nl <= dim) throw std::invalid_argument("need more landmarks than embedding dimensions");
  std::vector<char> seen(n, 0);
  for (Index id : landmarks.ids) {
    if (id < 0 || id >= n) throw std::invalid_argument("landmark id out of range");
    if (seen[id]) throw std::invalid_argument("repeated landmark id");
    seen[id] = 1;
  }

  // Squared geodesic distances, landmark x vertex.
  Matrix delta(nl, n);
  std::vector<char> finite(nl, 1);
#pragma omp parallel for schedule(dynamic, 1)
  for (Index l = 0; l < nl; ++l) {
    const auto d = dijkstra(patch, landmarks.ids[l]);
    for (Index v = 0; v < n; ++v) {
      if (!std::isfinite(d[v])) finite[l] = 0;
      delta(l, v) = d[v] * d[v];
    }
  }
  if (std::find(finite.begin(), finite.end(), 0) != finite.end()) throw std::runtime_error("patch is disconnected; geodesic distances are infinite");

  Matrix sq(nl, nl);
  for (Index j = 0; j < nl; ++j) sq.col(j) = delta.col(landmarks.ids[j]);
  // Symmetrize against asymmetric rounding in the shortest path sums.
  sq = 0.5 * (sq + sq.transpose()).eval();
  const Vector mean_col = sq.rowwise().mean();
  const Scalar mean_all = mean_col.mean();
  Matrix gram(nl, nl);
  for (Index j = 0; j < nl; ++j)
    for (Index i = 0; i < nl; ++i)
      gram(i, j) = -0.5 * (sq(i, j) - mean_col(i) - mean_col(j) + mean_all);

  PatchEmbedding emb;
  emb.landmarks = landmarks;
  Matrix vecs;
  symmetric_eigen_descending(gram, emb.eigenvalues, vecs);
  emb.lost_energy = lost_energy({emb.eigenvalues.data(), static_cast<std::size_t>(nl)}, dim);

  // Eigenvalues within rounding of zero count as nonpositive.
  const Scalar cutoff = static_cast<Scalar>(nl) * std::numeric_limits<Scalar>::epsilon() *
                        emb.eigenvalues.cwiseAbs().maxCoeff();
  // Rows of `proj` map (mean - delta_v) / 2 to coordinates.
  Matrix proj = Matrix::Zero(dim, nl);
  for (Index k = 0; k < dim; ++k) {
    const Scalar lambda = emb.eigenvalues(k);
    if (lambda > cutoff) {
      proj.row(k) = vecs.col(k).transpose() / std::sqrt(lambda);
    } else {
      emb.degenerate = true;
    }
  }
  emb.coords.resize(dim, n);
  Vector rhs(nl);
  for (Index v = 0; v < n; ++v) {
    rhs = 0.5 * (mean_col - delta.col(v));
    emb.coords.col(v) = proj * rhs;
  }
  // Landmarks take their spectral coordinates directly.
  for (Index j = 0; j < nl; ++j)
    for (Index k = 0; k < dim; ++k) {
      const Scalar lambda = emb.eigenvalues(k);
      emb.coords(k, landmarks.ids[j]) = lambda > cutoff ? std::sqrt(lambda) * vecs(j, k) : 0.0;
    }
  return emb;
}

}  // namespace gsf
