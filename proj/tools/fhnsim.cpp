// fhnsim: FitzHugh-Nagumo ensembles driven by noise, periodic forcing and
// delayed mean-field feedback, integrated either as a Monte Carlo ensemble of
// stochastic trajectories or through the associated Fokker-Planck density.
//
//   fhnsim run <config>      single scenario from a config file
//   fhnsim sweep <config>    one run per value of the swept parameter
//   fhnsim preset <name>     canned scenario (S1a S1b S2 S2-fig2 S3 S4 S5)
//
// Outputs: timeseries.csv, report.txt, optional density snapshots and, for
// sweeps, sweep.csv plus one subdirectory per swept value.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fhn/scenario.hpp"

namespace {

struct CommonFlags {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> snapshot_every;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--seed", flags.seed, "Master RNG seed");
  cmd->add_option("--method", flags.method, "Override method: fp|mc|both");
  cmd->add_option("--snapshot-every", flags.snapshot_every,
                  "Emit a density snapshot every DT time units")
      ->type_name("DT");
}

void apply_common_flags(fhn::ScenarioConfig& config, const CommonFlags& flags) {
  if (flags.out) config.output_dir = *flags.out;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.method) config.method = fhn::method_from_string(*flags.method);
  if (flags.snapshot_every)
    config.snapshot_times =
        fhn::snapshot_schedule(*flags.snapshot_every, config.t_end);
}

int execute(fhn::ScenarioConfig config, bool want_sweep) {
  if (want_sweep && !config.sweep)
    throw fhn::ConfigError("config has no sweep section; use 'run'");
  if (!want_sweep && config.sweep)
    throw fhn::ConfigError("config defines a sweep; use 'sweep'");
  if (config.sweep) {
    const auto report = fhn::run_sweep(config);
    fhn::emit_outputs(report, config.output_dir);
  } else {
    const auto report = fhn::run_scenario(config);
    fhn::emit_outputs(report, config.output_dir);
  }
  std::printf("wrote %s\n", config.output_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FitzHugh-Nagumo ensemble simulator"};
  app.require_subcommand(1);

  std::string config_path, preset_name;
  CommonFlags run_flags, sweep_flags, preset_flags;

  auto* run_cmd = app.add_subcommand("run", "Run a single scenario");
  run_cmd->add_option("config", config_path, "Scenario config file")
      ->required();
  add_common_flags(run_cmd, run_flags);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep_cmd->add_option("config", config_path, "Scenario config file")
      ->required();
  add_common_flags(sweep_cmd, sweep_flags);

  auto* preset_cmd = app.add_subcommand("preset", "Run a canned scenario");
  preset_cmd->add_option("name", preset_name, "S1a S1b S2 S2-fig2 S3 S4 S5")
      ->required();
  add_common_flags(preset_cmd, preset_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto config = fhn::load_config(config_path);
      apply_common_flags(config, run_flags);
      return execute(std::move(config), false);
    }
    if (sweep_cmd->parsed()) {
      auto config = fhn::load_config(config_path);
      apply_common_flags(config, sweep_flags);
      return execute(std::move(config), true);
    }
    auto config = fhn::preset(preset_name);
    if (!preset_flags.out) config.output_dir = "out_" + preset_name;
    apply_common_flags(config, preset_flags);
    return execute(std::move(config), config.sweep.has_value());
  } catch (const fhn::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "InternalError: %s\n", e.what());
    return 2;
  }
}
