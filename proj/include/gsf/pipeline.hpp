#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsf/compression.hpp"
#include "gsf/datasets.hpp"

namespace gsf {

/// Error raised inside a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string &message)
      : std::runtime_error(message), stage_(std::move(stage)) {}
  const std::string &stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  static constexpr int kSchemaVersion = 1;

  DatasetSpec dataset;
  SignalSpec signal;
  Scalar graph_epsilon = 0.04;
  std::vector<Index> patches{1};
  std::vector<Index> dims{2};
  Index landmarks = 100;
  std::vector<Index> moments{1, 2, 3, 4, 5};
  Scalar threshold = 1e-2;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  int threads = 0;
  bool record_timings = false;
  /// Fault injection for the verification harness.
  bool skip_qr_sign_fix = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

PipelineConfig parse_config(const std::string &json_text);
PipelineConfig load_config(const std::filesystem::path &path);
std::string config_to_json(const PipelineConfig &config);

/// Artifact file names inside the output directory.
namespace artifacts {
std::string cloud();
std::string dataset_info();
std::string signal();
std::string graph();
std::string graph_info();
std::string partition(Index p);
std::string partition_info(Index p);
std::string embedding(Index q, Index p);
std::string embedding_info(Index q, Index p);
std::string coefficients(Index q, Index p, Index m);
std::string decay(Index q, Index p, Index m);
std::string timing(Index q, Index p, Index m);
std::string sparse_at(Index q, Index p, Index m);
std::string sparse_nt(Index q, Index p, Index m);
std::string compress_info(Index q, Index p, Index m);
std::string report_json();
std::string report_csv();
std::string nnz_vs_moments();
}  // namespace artifacts

/// Individual stages, file to file inside config.output.
void stage_gen(const PipelineConfig &config);
void stage_graph(const PipelineConfig &config);
void stage_partition(const PipelineConfig &config);
void stage_embed(const PipelineConfig &config);
void stage_transform(const PipelineConfig &config);
void stage_compress(const PipelineConfig &config);
std::vector<ReportRow> stage_report(const PipelineConfig &config);

const std::vector<std::string> &stage_names();
void run_stage(const std::string &name, const PipelineConfig &config);

/// All stages in order; returns the report rows.
std::vector<ReportRow> run_pipeline(const PipelineConfig &config);

struct CheckResult {
  std::string name;
  bool passed = false;
  Scalar value = 0;
  Scalar tolerance = 0;
  std::string detail;
};

struct VerifyResult {
  std::vector<CheckResult> checks;
  bool passed() const;
  std::string to_json() const;
};

/// Invariant suite (orthogonality, vanishing moments, unit norm, energy
/// conservation, dense-oracle equivalence, determinism) on the configured
/// dataset, computed in memory.
VerifyResult run_verify(const PipelineConfig &config);

/// Applies config.threads to the worker pool.
void apply_thread_limit(const PipelineConfig &config);

}  // namespace gsf
