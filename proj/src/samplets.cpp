#include "gsf/samplets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gsf {

namespace {

// All multi-indices of length `dim` summing to `degree`, descending lexicographic.
void enumerate_degree(Index dim, int degree, std::vector<int> &prefix,
                      std::vector<std::vector<int>> &out) {
  if (static_cast<Index>(prefix.size()) == dim - 1) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = degree; a >= 0; --a) {
    prefix.push_back(a);
    enumerate_degree(dim, degree - a, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

MultiIndexSet::MultiIndexSet(Index dim, Index max_degree) : dim_(dim), max_degree_(max_degree) {
  if (dim < 1) throw std::invalid_argument("multi-index dimension must be positive");
  if (max_degree < 0) throw std::invalid_argument("polynomial degree must be nonnegative");
  std::vector<int> prefix;
  for (int d = 0; d <= max_degree; ++d) enumerate_degree(dim, d, prefix, indices_);
}

Index MultiIndexSet::degree(Index k) const {
  return std::accumulate(indices_[k].begin(), indices_[k].end(), Index{0});
}

Index polynomial_space_dim(Index dim, Index max_degree) {
  Index c = 1;
  for (Index k = 1; k <= dim; ++k) c = c * (max_degree + k) / k;
  return c;
}

Matrix moment_matrix(const Matrix &points, const MultiIndexSet &mis) {
  const Index q = points.rows();
  const Index n = points.cols();
  if (q != mis.dim()) throw std::invalid_argument("point dimension does not match multi-indices");
  const Index s = mis.max_degree();
  Matrix out(mis.size(), n);
  Matrix powers(q, s + 1);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < q; ++k) {
      powers(k, 0) = 1;
      for (Index e = 1; e <= s; ++e) powers(k, e) = powers(k, e - 1) * points(k, i);
    }
    for (Index a = 0; a < mis.size(); ++a) {
      Scalar v = 1;
      for (Index k = 0; k < q; ++k) v *= powers(k, mis[a][k]);
      out(a, i) = v;
    }
  }
  return out;
}

NodeFilters compute_filters(const Matrix &child_moments, const MultiIndexSet &mis, bool fix_signs) {
  if (child_moments.rows() != mis.size())
    throw std::invalid_argument("moment matrix must have one row per multi-index");
  NodeFilters f;
  f.num_inputs = child_moments.cols();
  f.num_scaling = std::min(f.num_inputs, mis.size());
  f.num_samplets = f.num_inputs - f.num_scaling;
  f.qr = HouseholderQR(child_moments.transpose(), fix_signs);
  f.moments_phi = f.qr.r().topRows(f.num_scaling).transpose();
  return f;
}

PatchFrame PatchFrame::fit(const Matrix &points) {
  PatchFrame frame;
  const Vector lo = points.rowwise().minCoeff();
  const Vector hi = points.rowwise().maxCoeff();
  frame.center = 0.5 * (lo + hi);
  const Scalar longest = (hi - lo).maxCoeff();
  frame.scale = longest > 0 ? 2.0 / longest : 1.0;
  return frame;
}

Matrix PatchFrame::apply(const Matrix &points) const {
  return (points.colwise() - center) * scale;
}

SampletTree SampletTree::build(const Matrix &coords, const SampletOptions &options) {
  if (options.vanishing_moments < 1) throw std::invalid_argument("need at least one vanishing moment");
  if (coords.cols() < 1) throw std::invalid_argument("empty patch");
  SampletTree st;
  st.mis_ = MultiIndexSet(coords.rows(), options.vanishing_moments - 1);
  st.frame_ = PatchFrame::fit(coords);
  st.points_ = st.frame_.apply(coords);
  const Index cap = options.leaf_capacity > 0 ? options.leaf_capacity : 2 * st.mis_.size();
  st.tree_ = ClusterTree::build(st.points_, cap);

  const auto &nodes = st.tree_.nodes();
  const auto &perm = st.tree_.permutation();
  const Index num_nodes = static_cast<Index>(nodes.size());
  st.filters_.resize(num_nodes);
  for (Index t = num_nodes - 1; t >= 0; --t) {
    const auto &node = nodes[t];
    Matrix moments;
    if (node.is_leaf()) {
      Matrix pts(st.points_.rows(), node.size());
      for (Index i = 0; i < node.size(); ++i) pts.col(i) = st.points_.col(perm[node.start + i]);
      moments = moment_matrix(pts, st.mis_);
    } else {
      Index cols = 0;
      for (Index c : node.children) cols += st.filters_[c].num_scaling;
      moments.resize(st.mis_.size(), cols);
      Index at = 0;
      for (Index c : node.children) {
        const auto &m = st.filters_[c].moments_phi;
        moments.middleCols(at, m.cols()) = m;
        at += m.cols();
      }
    }
    st.filters_[t] = compute_filters(moments, st.mis_, options.fix_qr_signs);
  }

  st.samplet_offset_.resize(num_nodes);
  st.scaling_offset_.resize(num_nodes);
  Index pos = st.filters_.front().num_scaling;
  Index spos = 0;
  for (Index t = 0; t < num_nodes; ++t) {
    st.samplet_offset_[t] = pos;
    pos += st.filters_[t].num_samplets;
    st.scaling_offset_[t] = spos;
    if (t > 0) spos += st.filters_[t].num_scaling;
  }
  st.scaling_buffer_size_ = spos;
  if (pos != st.size()) throw std::logic_error("samplet layout does not cover the patch");
  return st;
}

void SampletTree::forward(std::span<const Scalar> values, std::span<Scalar> coeffs) const {
  const Index n = size();
  if (static_cast<Index>(values.size()) != n || static_cast<Index>(coeffs.size()) != n)
    throw std::invalid_argument("signal length does not match patch size");
  const auto &nodes = tree_.nodes();
  const auto &perm = tree_.permutation();
  std::vector<Scalar> scal(scaling_buffer_size_);
  Vector x;
  for (Index t = static_cast<Index>(nodes.size()) - 1; t >= 0; --t) {
    const auto &node = nodes[t];
    const auto &f = filters_[t];
    x.resize(f.num_inputs);
    if (node.is_leaf()) {
      for (Index i = 0; i < node.size(); ++i) x(i) = values[perm[node.start + i]];
    } else {
      Index at = 0;
      for (Index c : node.children) {
        const Index k = filters_[c].num_scaling;
        std::copy_n(scal.data() + scaling_offset_[c], k, x.data() + at);
        at += k;
      }
    }
    f.qr.apply_qt(x);
    Scalar *dst = t == 0 ? coeffs.data() : scal.data() + scaling_offset_[t];
    std::copy_n(x.data(), f.num_scaling, dst);
    std::copy_n(x.data() + f.num_scaling, f.num_samplets, coeffs.data() + samplet_offset_[t]);
  }
}

void SampletTree::inverse(std::span<const Scalar> coeffs, std::span<Scalar> values) const {
  const Index n = size();
  if (static_cast<Index>(values.size()) != n || static_cast<Index>(coeffs.size()) != n)
    throw std::invalid_argument("coefficient length does not match patch size");
  const auto &nodes = tree_.nodes();
  const auto &perm = tree_.permutation();
  std::vector<Scalar> scal(scaling_buffer_size_);
  Vector x;
  for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t) {
    const auto &node = nodes[t];
    const auto &f = filters_[t];
    x.resize(f.num_inputs);
    const Scalar *src = t == 0 ? coeffs.data() : scal.data() + scaling_offset_[t];
    std::copy_n(src, f.num_scaling, x.data());
    std::copy_n(coeffs.data() + samplet_offset_[t], f.num_samplets, x.data() + f.num_scaling);
    f.qr.apply_q(x);
    if (node.is_leaf()) {
      for (Index i = 0; i < node.size(); ++i) values[perm[node.start + i]] = x(i);
    } else {
      Index at = 0;
      for (Index c : node.children) {
        const Index k = filters_[c].num_scaling;
        std::copy_n(x.data() + at, k, scal.data() + scaling_offset_[c]);
        at += k;
      }
    }
  }
}

void SampletTree::visit_basis(const BasisVisitor &visit) const {
  const auto &nodes = tree_.nodes();
  std::vector<Matrix> scaling(nodes.size());
  for (Index t = static_cast<Index>(nodes.size()) - 1; t >= 0; --t) {
    const auto &node = nodes[t];
    const auto &f = filters_[t];
    Matrix inputs = Matrix::Zero(node.size(), f.num_inputs);
    if (node.is_leaf()) {
      inputs.setIdentity();
    } else {
      Index col = 0;
      for (Index c : node.children) {
        const auto &child = nodes[c];
        inputs.block(child.start - node.start, col, child.size(), scaling[c].cols()) = scaling[c];
        col += scaling[c].cols();
        scaling[c].resize(0, 0);
      }
    }
    const Matrix combined = inputs * f.qr.q();
    scaling[t] = combined.leftCols(f.num_scaling);
    visit(t, scaling[t], combined.rightCols(f.num_samplets));
  }
}

Matrix SampletTree::dense_transform() const {
  const Index n = size();
  Matrix t_mat = Matrix::Zero(n, n);
  const auto &perm = tree_.permutation();
  visit_basis([&](Index t, const Matrix &phi, const Matrix &psi) {
    const auto &node = tree_.node(t);
    for (Index i = 0; i < node.size(); ++i) {
      const Index v = perm[node.start + i];
      for (Index k = 0; k < psi.cols(); ++k) t_mat(samplet_offset_[t] + k, v) = psi(i, k);
      if (t == 0)
        for (Index k = 0; k < phi.cols(); ++k) t_mat(k, v) = phi(i, k);
    }
  });
  return t_mat;
}

SampletForest SampletForest::build(const std::vector<std::vector<Index>> &patch_vertices,
                                   const std::vector<Matrix> &coords, Index num_vertices,
                                   const SampletOptions &options) {
  if (patch_vertices.size() != coords.size())
    throw std::invalid_argument("one embedding per patch required");
  SampletForest forest;
  forest.num_vertices_ = num_vertices;
  forest.options_ = options;
  forest.patch_vertices_ = patch_vertices;
  const Index p = static_cast<Index>(patch_vertices.size());
  forest.patch_offset_.resize(p + 1, 0);
  std::vector<char> covered(num_vertices, 0);
  for (Index r = 0; r < p; ++r) {
    if (coords[r].cols() != static_cast<Index>(patch_vertices[r].size()))
      throw std::invalid_argument("embedding size does not match patch size");
    for (Index v : patch_vertices[r]) {
      if (v < 0 || v >= num_vertices || covered[v])
        throw std::invalid_argument("patches must partition the vertex set");
      covered[v] = 1;
    }
    forest.patch_offset_[r + 1] = forest.patch_offset_[r] + coords[r].cols();
  }
  if (forest.patch_offset_[p] != num_vertices)
    throw std::invalid_argument("patches must partition the vertex set");
  forest.trees_.resize(p);
#pragma omp parallel for schedule(dynamic, 1)
  for (Index r = 0; r < p; ++r) forest.trees_[r] = SampletTree::build(coords[r], options);
  return forest;
}

Vector SampletForest::forward(std::span<const Scalar> signal) const {
  if (static_cast<Index>(signal.size()) != num_vertices_)
    throw std::invalid_argument("signal length does not match the forest");
  Vector out(num_vertices_);
  const Index p = num_patches();
#pragma omp parallel for schedule(dynamic, 1)
  for (Index r = 0; r < p; ++r) {
    const auto &verts = patch_vertices_[r];
    std::vector<Scalar> local(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) local[i] = signal[verts[i]];
    trees_[r].forward(local, {out.data() + patch_offset_[r], verts.size()});
  }
  return out;
}

Vector SampletForest::inverse(std::span<const Scalar> coeffs) const {
  if (static_cast<Index>(coeffs.size()) != num_vertices_)
    throw std::invalid_argument("coefficient length does not match the forest");
  Vector out(num_vertices_);
  const Index p = num_patches();
#pragma omp parallel for schedule(dynamic, 1)
  for (Index r = 0; r < p; ++r) {
    const auto &verts = patch_vertices_[r];
    std::vector<Scalar> local(verts.size());
    trees_[r].inverse({coeffs.data() + patch_offset_[r], verts.size()}, local);
    for (std::size_t i = 0; i < verts.size(); ++i) out(verts[i]) = local[i];
  }
  return out;
}

std::vector<CoefficientTag> SampletForest::tags() const {
  std::vector<CoefficientTag> tags(num_vertices_);
  for (Index r = 0; r < num_patches(); ++r) {
    const auto &tree = trees_[r];
    const Index base = patch_offset_[r];
    for (Index k = 0; k < tree.num_root_scaling(); ++k)
      tags[base + k] = {r, 0, 0, CoefficientKind::scaling, k};
    const auto &nodes = tree.cluster_tree().nodes();
    for (Index t = 0; t < static_cast<Index>(nodes.size()); ++t)
      for (Index k = 0; k < tree.filters(t).num_samplets; ++k)
        tags[base + tree.samplet_offset(t) + k] = {r, t, nodes[t].level, CoefficientKind::samplet, k};
  }
  return tags;
}

CoefficientVector forward_transform(const SampletForest &forest, std::span<const Scalar> signal) {
  CoefficientVector out;
  out.values = forest.forward(signal);
  out.tags = forest.tags();
  return out;
}

std::vector<Scalar> inverse_transform(const SampletForest &forest, const CoefficientVector &coeffs) {
  const Vector v = forest.inverse({coeffs.values.data(), static_cast<std::size_t>(coeffs.values.size())});
  return {v.data(), v.data() + v.size()};
}

std::vector<LevelDecay> decay_report(const SampletForest &forest, const CoefficientVector &coeffs) {
  if (coeffs.values.size() != forest.num_vertices() ||
      static_cast<Index>(coeffs.tags.size()) != forest.num_vertices())
    throw std::invalid_argument("coefficients do not match the forest");
  std::vector<LevelDecay> levels;
  for (Index k = 0; k < coeffs.values.size(); ++k) {
    const auto &tag = coeffs.tags[k];
    if (tag.kind != CoefficientKind::samplet) continue;
    while (static_cast<Index>(levels.size()) <= tag.level)
      levels.push_back({static_cast<Index>(levels.size()), 0, 0});
    auto &l = levels[tag.level];
    l.max_abs = std::max(l.max_abs, std::abs(coeffs.values(k)));
    ++l.count;
  }
  return levels;
}

}  // namespace gsf
