#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gsf/graph.hpp"

namespace gsf {

/// Portable random stream: std::mt19937_64 (fully specified by the standard)
/// with explicit conversions to doubles, so sequences match on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// 53-bit uniform in [0, 1).
  Scalar uniform() { return static_cast<Scalar>(engine_() >> 11) * 0x1.0p-53; }
  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }
  /// Box-Muller, one normal per pair of uniforms.
  Scalar normal();

 private:
  std::mt19937_64 engine_;
};

enum class DatasetKind { unit_square, swiss_roll, deformed_sphere, point_cloud_file };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::unit_square;
  Index num_points = 10000;
  std::uint64_t seed = 1;
  Index ambient_dim = 100;
  Scalar noise = 1e-6;
  std::filesystem::path path;
  /// Signal center for point_cloud_file; empty means the cloud's centroid.
  std::vector<Scalar> center;
};

struct Dataset {
  PointCloud cloud;
  /// Signal center x* in ambient coordinates.
  Vector center;
};

/// Uniform points of [0,1]^2 placed in the first two of `ambient_dim`
/// coordinates, randomly rotated, then perturbed by uniform noise.
Dataset gen_unit_square(Index n, Index ambient_dim, Scalar noise, std::uint64_t seed);

/// [t cos t, v, t sin t] for uniform (t, v) in [1.5 pi, 4.5 pi] x [0, 10],
/// centered at the mean and scaled so the longest bounding box edge is 1.
Dataset gen_swiss_roll(Index n, std::uint64_t seed);

/// Closed, smoothly deformed sphere of radius ~0.5; stands in for scanned
/// surfaces and needs several charts.
Dataset gen_deformed_sphere(Index n, std::uint64_t seed);

Dataset make_dataset(const DatasetSpec &spec);

std::string dataset_kind_name(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string &name);

/// Seeded Haar-distributed orthogonal matrix (QR of a Gaussian matrix with diag(R) >= 0).
Matrix random_orthogonal(Index dim, Rng &rng);

enum class SignalKind { damped_cosine, plain_cosine, radial_power, embedded_polynomial };

struct SignalSpec {
  SignalKind kind = SignalKind::damped_cosine;
  /// Ambient center for the cosine kinds.
  Vector center;
  /// exp(-decay r) cos(frequency pi r).
  Scalar decay = 4;
  Scalar frequency = 8;
  /// |phi(v) - phi(v0)|^exponent.
  Scalar exponent = 1.5;
  /// Local vertex v0 of the embedded kinds.
  Index origin = 0;
  /// Polynomial coefficients in graded lexicographic multi-index order.
  std::vector<Scalar> coefficients;
};

std::string signal_kind_name(SignalKind kind);
SignalKind parse_signal_kind(const std::string &name);

/// Cosine kinds on ambient points (d x N).
std::vector<Scalar> eval_signal(const SignalSpec &spec, const Matrix &points);

/// Embedded kinds on chart coordinates (q x N). Polynomials are evaluated in
/// patch-normalized coordinates (see PatchFrame).
std::vector<Scalar> eval_embedded_signal(const SignalSpec &spec, const Matrix &coords);

}  // namespace gsf
