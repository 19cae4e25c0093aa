#include <doctest.h>

#include <Eigen/QR>
#include <random>

#include "gsf/householder.hpp"

using namespace gsf;

namespace {

Matrix random_matrix(Index m, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Matrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = g(rng);
  return a;
}

void check_factorization(const Matrix &a, const HouseholderQR &qr, bool signs_fixed) {
  const Index m = a.rows(), n = a.cols();
  const Matrix q = qr.q();
  const Matrix &r = qr.r();
  REQUIRE(q.rows() == m);
  REQUIRE(q.cols() == m);
  REQUIRE(r.rows() == m);
  REQUIRE(r.cols() == n);
  CHECK((q.transpose() * q - Matrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((q * r - a).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()));
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < m; ++i) CHECK(r(i, j) == 0.0);
  if (signs_fixed)
    for (Index k = 0; k < std::min(m, n); ++k) CHECK(r(k, k) >= 0.0);

  // Factored application agrees with the dense factor.
  const Matrix x = random_matrix(m, 1, 99);
  Vector y = x.col(0);
  qr.apply_qt(y);
  CHECK((y - q.transpose() * x.col(0)).cwiseAbs().maxCoeff() < 1e-13);
  qr.apply_q(y);
  CHECK((y - x.col(0)).cwiseAbs().maxCoeff() < 1e-13);
}

}  // namespace

TEST_CASE("Householder QR of tall, square and wide matrices") {
  std::uint64_t seed = 1;
  for (Index m : {1, 2, 5, 12})
    for (Index n : {1, 3, 7, 12}) {
      CAPTURE(m);
      CAPTURE(n);
      const Matrix a = random_matrix(m, n, seed++);
      check_factorization(a, HouseholderQR(a), true);
      check_factorization(a, HouseholderQR(a, false), false);
    }
}

TEST_CASE("R agrees with an independent QR up to row signs") {
  const Matrix a = random_matrix(9, 6, 4);
  const HouseholderQR mine(a);
  const Eigen::HouseholderQR<Matrix> ref(a);
  const Matrix r_ref = ref.matrixQR().triangularView<Eigen::Upper>();
  CHECK((mine.r().cwiseAbs() - r_ref.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank deficient and zero columns") {
  Matrix a = random_matrix(6, 4, 8);
  a.col(1).setZero();
  a.col(3) = 2 * a.col(0);
  check_factorization(a, HouseholderQR(a), true);
  const Matrix z = Matrix::Zero(4, 3);
  const HouseholderQR qz(z);
  CHECK(qz.q() == Matrix::Identity(4, 4));
  CHECK(qz.r() == z);
}

TEST_CASE("sign convention makes the factorization unique for full rank input") {
  const Matrix a = random_matrix(5, 5, 12);
  const HouseholderQR qr(a);
  const Matrix flipped = -a;
  const HouseholderQR qf(flipped);
  CHECK((qf.q() + qr.q()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((qf.r() - qr.r()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("two-point column gives the symmetric Haar pair") {
  Matrix a(2, 1);
  a << 1, 1;
  const Matrix q = HouseholderQR(a).q();
  const double h = 1 / std::sqrt(2.0);
  CHECK(q(0, 0) == doctest::Approx(h));
  CHECK(q(1, 0) == doctest::Approx(h));
  CHECK(q(0, 1) == doctest::Approx(-h));
  CHECK(q(1, 1) == doctest::Approx(h));
}
