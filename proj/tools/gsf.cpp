// Command-line front end: one subcommand per pipeline stage plus the fused
// pipeline and the invariant checker.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include "gsf/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<double> eps;
  std::optional<std::vector<gsf::Index>> patches;
  std::optional<std::vector<gsf::Index>> dims;
  std::optional<gsf::Index> landmarks;
  std::optional<std::vector<gsf::Index>> moments;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  bool record_timings = false;
  std::string fault;
};

void add_flags(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--eps", o.eps, "epsilon-graph radius");
  cmd->add_option("--patches", o.patches, "number of patches (list allowed)")->delimiter(',');
  cmd->add_option("--dim", o.dims, "embedding dimension q (list allowed)")->delimiter(',');
  cmd->add_option("--landmarks", o.landmarks, "landmarks per patch");
  cmd->add_option("--moments", o.moments, "vanishing moments s+1 (list allowed)")->delimiter(',');
  cmd->add_option("--threshold", o.threshold, "compression epsilon");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--threads", o.threads, "worker thread cap");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--record-timings", o.record_timings, "add wall-clock timings to the report");
  cmd->add_option("--inject-fault", o.fault, "fault injection for verify")
      ->check(CLI::IsMember({"skip-qr-sign-fix"}));
}

gsf::PipelineConfig resolve(const Overrides &o) {
  gsf::PipelineConfig c;
  if (!o.config.empty()) c = gsf::load_config(o.config);
  if (o.eps) c.graph_epsilon = *o.eps;
  if (o.patches) c.patches = *o.patches;
  if (o.dims) c.dims = *o.dims;
  if (o.landmarks) c.landmarks = *o.landmarks;
  if (o.moments) c.moments = *o.moments;
  if (o.threshold) c.threshold = *o.threshold;
  if (o.seed) {
    c.seed = *o.seed;
    c.dataset.seed = *o.seed;
  }
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.output = *o.out;
  if (o.record_timings) c.record_timings = true;
  if (o.fault == "skip-qr-sign-fix") c.skip_qr_sign_fix = true;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Samplet-forest analysis and compression of graph signals"};
  app.require_subcommand(1);
  Overrides overrides;
  std::vector<std::pair<std::string, CLI::App *>> commands;
  for (const auto &name : gsf::stage_names()) commands.emplace_back(name, app.add_subcommand(name, "run the " + name + " stage"));
  commands.emplace_back("pipeline", app.add_subcommand("pipeline", "run every stage"));
  commands.emplace_back("verify", app.add_subcommand("verify", "check transform invariants"));
  for (auto &[name, cmd] : commands) add_flags(cmd, overrides);

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    const gsf::PipelineConfig config = resolve(overrides);
    gsf::apply_thread_limit(config);
    for (auto &[name, cmd] : commands) {
      if (!cmd->parsed()) continue;
      stage = name;
      if (name == "pipeline") {
        const auto rows = gsf::run_pipeline(config);
        std::cout << "wrote " << rows.size() << " report rows to "
                  << (config.output / gsf::artifacts::report_json()).string() << "\n";
      } else if (name == "verify") {
        const auto result = gsf::run_verify(config);
        std::cout << result.to_json();
        return result.passed() ? 0 : 1;
      } else {
        gsf::run_stage(name, config);
      }
    }
  } catch (const gsf::StageError &e) {
    std::cerr << "[" << e.stage() << "] " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "[" << stage << "] " << e.what() << "\n";
    return 2;
  }
  return 0;
}
