#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "sonarcrlb/config.hpp"
#include "sonarcrlb/errors.hpp"
#include "sonarcrlb/mc_validate.hpp"
#include "sonarcrlb/sweep.hpp"

namespace {

using namespace sonarcrlb;

struct CommonArgs {
  std::string config;
  std::optional<int> workers;
};

SweepConfig load(const CommonArgs& args) {
  SweepConfig cfg = load_config(args.config);
  if (args.workers) cfg.workers = *args.workers;
  return cfg;
}

int run_sweep_command(const CommonArgs& args, const std::string& out, const std::string& cases,
                      std::optional<std::uint64_t> seed) {
  SweepConfig cfg = load(args);
  if (!cases.empty()) cfg.cases = parse_case_list(cases);
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const CrlbGrid grid = run_sweep(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_sweep_outputs(grid, cfg, out, wall);

  std::size_t flagged = 0;
  for (const auto& m : grid.maps) {
    for (const auto& f : m.flag) flagged += f == flags::kOk ? 0 : 1;
  }
  std::printf("sweep: %zu points x %zu maps in %.2f s, %zu flagged entries, outputs in %s\n", grid.grid.size(),
              grid.maps.size(), wall, flagged, out.c_str());
  return 0;
}

int run_wbaf_command(const CommonArgs& args, const std::string& out) {
  const SweepConfig cfg = load(args);
  write_wbaf_outputs(cfg, out);
  std::printf("wbaf: %zu waveform(s) written to %s\n", cfg.waveforms.size(), out.c_str());
  return 0;
}

int run_compare_command(const CommonArgs& args) {
  const SweepConfig cfg = load(args);
  std::cout << format_comparison(compare_waveforms(cfg));
  return 0;
}

int run_mc_command(const CommonArgs& args, std::optional<int> trials, std::optional<std::uint64_t> seed,
                   std::optional<int> case_id) {
  const SweepConfig cfg = load(args);
  McOptions options;
  options.case_id = fusion_case_from_int(case_id.value_or(cfg.mc.case_id));
  options.num_trials = trials.value_or(cfg.mc.trials);
  options.seed = seed.value_or(cfg.mc.seed);
  options.workers = cfg.workers;
  if (options.num_trials < 1) throw ConfigError("--trials must be >= 1");
  const std::vector<SampledWaveform> waveforms = cfg.materialize_waveforms();
  const auto start = std::chrono::steady_clock::now();
  const McReport report = mc_crlb_check(cfg.scenario, waveforms.front(), options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "waveform " << cfg.waveforms.front().name << ", seed " << options.seed << "\n"
            << format_report(report);
  std::printf("wall time %.2f s\n", wall);
  return report.bound_respected() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRLB simulator for two-node bistatic array localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sonarcrlb::version()));

  CommonArgs sweep_args, wbaf_args, compare_args, mc_args;
  std::string sweep_out, wbaf_out, sweep_cases;
  std::optional<std::uint64_t> sweep_seed, mc_seed;
  std::optional<int> mc_trials, mc_case;

  auto* sweep = app.add_subcommand("sweep", "Evaluate CRLB maps over the target grid");
  sweep->add_option("--config", sweep_args.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--workers", sweep_args.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sweep->add_option("--cases", sweep_cases, "Comma-separated fusion cases, e.g. 1,2,3");
  sweep->add_option("--seed", sweep_seed, "Master seed for waveform generation");

  auto* wbaf = app.add_subcommand("wbaf", "Wideband ambiguity surfaces and cuts per waveform");
  wbaf->add_option("--config", wbaf_args.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  wbaf->add_option("--out", wbaf_out, "Output directory")->required();
  wbaf->add_option("--workers", wbaf_args.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  auto* compare = app.add_subcommand("compare", "Case-2 Doppler bound and WBAF summary per waveform");
  compare->add_option("--config", compare_args.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  compare->add_option("--workers", compare_args.workers, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* mc = app.add_subcommand("mc-check", "Monte-Carlo ML check of the bound on a small instance");
  mc->add_option("--config", mc_args.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  mc->add_option("--trials", mc_trials, "Number of trials");
  mc->add_option("--seed", mc_seed, "Master seed");
  mc->add_option("--case", mc_case, "Fusion case (1, 2 or 3)");
  mc->add_option("--workers", mc_args.workers, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep_command(sweep_args, sweep_out, sweep_cases, sweep_seed);
    if (*wbaf) return run_wbaf_command(wbaf_args, wbaf_out);
    if (*compare) return run_compare_command(compare_args);
    if (*mc) return run_mc_command(mc_args, mc_trials, mc_seed, mc_case);
  } catch (const sonarcrlb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
