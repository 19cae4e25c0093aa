#include "gsf/householder.hpp"

#include <algorithm>
#include <cmath>

namespace gsf {

HouseholderQR::HouseholderQR(const Matrix &a, bool fix_signs) {
  const Index m = a.rows();
  const Index n = a.cols();
  const Index steps = std::min(m, n);
  r_ = a;
  reflectors_ = Matrix::Zero(m, steps);
  signs_ = Vector::Ones(m);
  for (Index k = 0; k < steps; ++k) {
    const Index len = m - k;
    auto x = r_.col(k).tail(len);
    const Scalar norm = x.norm();
    if (norm == 0) continue;
    const Scalar alpha = x(0) >= 0 ? norm : -norm;
    Vector v = x;
    v(0) += alpha;
    v /= v.norm();
    reflectors_.col(k).tail(len) = v;
    // R_kk = -alpha; entries below the diagonal vanish exactly.
    auto block = r_.bottomRightCorner(len, n - k);
    block.noalias() -= (2 * v) * (v.transpose() * block);
    r_(k, k) = -alpha;
    r_.col(k).tail(len - 1).setZero();
  }
  if (fix_signs)
    for (Index k = 0; k < steps; ++k)
      if (r_(k, k) < 0) {
        signs_(k) = -1;
        r_.row(k) *= -1;
      }
}

void HouseholderQR::apply_qt(Eigen::Ref<Vector> x) const {
  const Index m = reflectors_.rows();
  for (Index k = 0; k < reflectors_.cols(); ++k) {
    const auto v = reflectors_.col(k).tail(m - k);
    auto seg = x.tail(m - k);
    const Scalar dot = v.dot(seg);
    if (dot != 0) seg -= (2 * dot) * v;
  }
  x.array() *= signs_.array();
}

void HouseholderQR::apply_q(Eigen::Ref<Vector> x) const {
  const Index m = reflectors_.rows();
  x.array() *= signs_.array();
  for (Index k = reflectors_.cols() - 1; k >= 0; --k) {
    const auto v = reflectors_.col(k).tail(m - k);
    auto seg = x.tail(m - k);
    const Scalar dot = v.dot(seg);
    if (dot != 0) seg -= (2 * dot) * v;
  }
}

Matrix HouseholderQR::q() const {
  const Index m = reflectors_.rows();
  Matrix out = Matrix::Identity(m, m);
  for (Index j = 0; j < m; ++j) {
    Vector col = out.col(j);
    apply_q(col);
    out.col(j) = col;
  }
  return out;
}

}  // namespace gsf
