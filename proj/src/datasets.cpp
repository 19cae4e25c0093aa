#include "gsf/datasets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gsf/householder.hpp"
#include "gsf/io.hpp"
#include "gsf/samplets.hpp"

namespace gsf {

Scalar Rng::normal() {
  const Scalar u1 = 1.0 - uniform();
  const Scalar u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix random_orthogonal(Index dim, Rng &rng) {
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
  return HouseholderQR(g).q();
}

Dataset gen_unit_square(Index n, Index ambient_dim, Scalar noise, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  if (ambient_dim < 2) throw std::invalid_argument("ambient dimension must be at least 2");
  if (noise < 0) throw std::invalid_argument("noise amplitude must be nonnegative");
  Rng rng(seed);
  const Matrix rot = random_orthogonal(ambient_dim, rng);
  Matrix flat(2, n);
  for (Index i = 0; i < n; ++i) {
    flat(0, i) = rng.uniform();
    flat(1, i) = rng.uniform();
  }
  Dataset ds;
  ds.cloud.points = rot.leftCols(2) * flat;
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < ambient_dim; ++k) ds.cloud.points(k, i) += noise * rng.uniform(-1, 1);
  ds.center = rot.leftCols(2) * Eigen::Vector2d(0.5, 0.5);
  return ds;
}

Dataset gen_swiss_roll(Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  constexpr Scalar pi = std::numbers::pi;
  Rng rng(seed);
  Matrix pts(3, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar t = rng.uniform(1.5 * pi, 4.5 * pi);
    const Scalar v = rng.uniform(0, 10);
    pts.col(i) << t * std::cos(t), v, t * std::sin(t);
  }
  const Vector mean = pts.rowwise().mean();
  pts.colwise() -= mean;
  const Scalar longest = (pts.rowwise().maxCoeff() - pts.rowwise().minCoeff()).maxCoeff();
  const Scalar scale = longest > 0 ? 1.0 / longest : 1.0;
  pts *= scale;
  Dataset ds;
  ds.cloud.points = std::move(pts);
  const Scalar t0 = 3 * pi;
  ds.center = (Eigen::Vector3d(t0 * std::cos(t0), 5.0, t0 * std::sin(t0)) - mean) * scale;
  return ds;
}

namespace {

Vector sphere_point(const Eigen::Vector3d &dir) {
  const Scalar r = 0.5 * (1 + 0.2 * dir.z() + 0.15 * std::sin(3 * dir.x()) * std::cos(2 * dir.y()));
  return r * dir;
}

}  // namespace

Dataset gen_deformed_sphere(Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("need at least one point");
  Rng rng(seed);
  Dataset ds;
  ds.cloud.points.resize(3, n);
  for (Index i = 0; i < n; ++i) {
    Eigen::Vector3d dir;
    do {
      dir << rng.normal(), rng.normal(), rng.normal();
    } while (dir.norm() == 0);
    ds.cloud.points.col(i) = sphere_point(dir.normalized());
  }
  ds.center = sphere_point(Eigen::Vector3d(0.48, 0.6, 0.64));
  return ds;
}

Dataset make_dataset(const DatasetSpec &spec) {
  switch (spec.kind) {
    case DatasetKind::unit_square:
      return gen_unit_square(spec.num_points, spec.ambient_dim, spec.noise, spec.seed);
    case DatasetKind::swiss_roll:
      return gen_swiss_roll(spec.num_points, spec.seed);
    case DatasetKind::deformed_sphere:
      return gen_deformed_sphere(spec.num_points, spec.seed);
    case DatasetKind::point_cloud_file: {
      Dataset ds;
      ds.cloud = io::load_point_cloud(spec.path);
      if (spec.center.empty()) {
        ds.center = ds.cloud.points.rowwise().mean();
      } else {
        if (static_cast<Index>(spec.center.size()) != ds.cloud.dim())
          throw std::invalid_argument("signal center dimension does not match the point cloud");
        ds.center = Eigen::Map<const Vector>(spec.center.data(), static_cast<Index>(spec.center.size()));
      }
      return ds;
    }
  }
  throw std::invalid_argument("unknown dataset kind");
}

std::string dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::unit_square: return "unit_square";
    case DatasetKind::swiss_roll: return "swiss_roll";
    case DatasetKind::deformed_sphere: return "deformed_sphere";
    case DatasetKind::point_cloud_file: return "point_cloud_file";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(const std::string &name) {
  if (name == "unit_square") return DatasetKind::unit_square;
  if (name == "swiss_roll") return DatasetKind::swiss_roll;
  if (name == "deformed_sphere") return DatasetKind::deformed_sphere;
  if (name == "point_cloud_file") return DatasetKind::point_cloud_file;
  throw std::invalid_argument("unknown dataset kind '" + name + "'");
}

std::string signal_kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::damped_cosine: return "damped_cosine";
    case SignalKind::plain_cosine: return "plain_cosine";
    case SignalKind::radial_power: return "radial_power";
    case SignalKind::embedded_polynomial: return "embedded_polynomial";
  }
  return "unknown";
}

SignalKind parse_signal_kind(const std::string &name) {
  if (name == "damped_cosine") return SignalKind::damped_cosine;
  if (name == "plain_cosine") return SignalKind::plain_cosine;
  if (name == "radial_power") return SignalKind::radial_power;
  if (name == "embedded_polynomial") return SignalKind::embedded_polynomial;
  throw std::invalid_argument("unknown signal kind '" + name + "'");
}

std::vector<Scalar> eval_signal(const SignalSpec &spec, const Matrix &points) {
  if (spec.kind != SignalKind::damped_cosine && spec.kind != SignalKind::plain_cosine)
    throw std::invalid_argument("signal kind needs chart coordinates");
  if (spec.center.size() != points.rows())
    throw std::invalid_argument("signal center dimension does not match the points");
  constexpr Scalar pi = std::numbers::pi;
  std::vector<Scalar> out(points.cols());
  for (Index i = 0; i < points.cols(); ++i) {
    const Scalar r = (points.col(i) - spec.center).norm();
    out[i] = spec.kind == SignalKind::plain_cosine
                 ? std::cos(pi * r)
                 : std::exp(-spec.decay * r) * std::cos(spec.frequency * pi * r);
  }
  return out;
}

std::vector<Scalar> eval_embedded_signal(const SignalSpec &spec, const Matrix &coords) {
  if (spec.origin < 0 || spec.origin >= coords.cols())
    throw std::invalid_argument("signal origin outside the patch");
  std::vector<Scalar> out(coords.cols());
  if (spec.kind == SignalKind::radial_power) {
    for (Index i = 0; i < coords.cols(); ++i)
      out[i] = std::pow((coords.col(i) - coords.col(spec.origin)).norm(), spec.exponent);
    return out;
  }
  if (spec.kind != SignalKind::embedded_polynomial)
    throw std::invalid_argument("signal kind needs ambient points");
  const Matrix z = PatchFrame::fit(coords).apply(coords);
  Index degree = 0;
  while (polynomial_space_dim(coords.rows(), degree) < static_cast<Index>(spec.coefficients.size()))
    ++degree;
  if (polynomial_space_dim(coords.rows(), degree) != static_cast<Index>(spec.coefficients.size()))
    throw std::invalid_argument("polynomial coefficient count must equal a full multi-index set size");
  const MultiIndexSet mis(coords.rows(), degree);
  const Matrix shifted = z.colwise() - z.col(spec.origin);
  const Matrix mom = moment_matrix(shifted, mis);
  for (Index i = 0; i < coords.cols(); ++i) {
    Scalar v = 0;
    for (Index a = 0; a < mis.size(); ++a) v += spec.coefficients[a] * mom(a, i);
    out[i] = v;
  }
  return out;
}

}  // namespace gsf
