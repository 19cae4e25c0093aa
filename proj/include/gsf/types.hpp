#pragma once

#include <cstdint>
#include <limits>

#include <Eigen/Dense>

namespace gsf {

using Index = std::int64_t;
using Scalar = double;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr Scalar kInfinity = std::numeric_limits<Scalar>::infinity();

}  // namespace gsf
