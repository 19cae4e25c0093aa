#pragma once

#include "gsf/types.hpp"

namespace gsf {

/// Full QR factorization A = Q R of an m x n matrix by Householder
/// reflections, Q = H_0 H_1 ... H_{k-1} D with D = diag(+-1) chosen so that
/// diag(R) >= 0. Q is kept in factored form.
class HouseholderQR {
 public:
  HouseholderQR() = default;

  /// With `fix_signs` false the reflectors' natural signs are kept.
  explicit HouseholderQR(const Matrix &a, bool fix_signs = true);

  Index rows() const { return reflectors_.rows(); }
  /// m x n upper triangular factor.
  const Matrix &r() const { return r_; }

  /// y = Q^T x, in place.
  void apply_qt(Eigen::Ref<Vector> x) const;
  /// y = Q x, in place.
  void apply_q(Eigen::Ref<Vector> x) const;

  /// Dense m x m orthogonal factor.
  Matrix q() const;

 private:
  // Column j is the unit reflector v_j (zero above row j); H_j = I - 2 v_j v_j^T.
  Matrix reflectors_;
  Vector signs_;
  Matrix r_;
};

}  // namespace gsf
