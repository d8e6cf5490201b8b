#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fhn/drive.hpp"
#include "fhn/fokker_planck.hpp"
#include "fhn/grid.hpp"
#include "fhn/model.hpp"
#include "fhn/sde.hpp"
#include "fhn/spectral.hpp"
#include "fhn/types.hpp"

namespace fhn {

enum class Method { FokkerPlanck, MonteCarlo, Both };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

// Declarative experiment description; see docs/config-format in the README.
struct ScenarioConfig {
  Method method = Method::FokkerPlanck;
  FhnParams params{};
  GridSpec grid = GridSpec::make_default();
  GaussianInit init{};
  DriveSpec drive = DriveSpec::constant(0);
  double t_end = 150;
  double dt = 0.01;
  std::vector<double> snapshot_times;
  std::optional<SweepSpec> sweep;
  std::uint64_t seed = 1;
  std::int64_t n_trajectories = 10000;
  std::string output_dir = "out";
};

void validate(const ScenarioConfig& config);

ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::filesystem::path& path);
void write_config(std::ostream& os, const ScenarioConfig& config);

// Canned experiments: S1a, S1b (noise only), S2 (periodic force + noise
// sweep), S2-fig2 (caption amplitude variant), S3 (delayed feedback),
// S4 (delay sweep), S5 (periodic force + feedback).
ScenarioConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

struct RunResult {
  ArrayXd time;    // sample times, length floor(t_end/dt)+1
  ArrayXd mean_u;  // <u(t)>
  ArrayXd mean_v;
  ArrayXd n;       // supra-threshold fraction
  ArrayXd input;   // I1 applied at each step
  ArrayXd mass;    // fp: surviving probability mass; mc: alive fraction
  double n_max = 0;               // over the second half of the run
  double dominant_frequency = 0;  // periodogram argmax of n(t), second half
  std::optional<SnrResult> snr;   // present when the drive has a periodic term
  double leaked_mass = 0;
  std::vector<DensityField> snapshots;
  std::vector<McSnapshot> mc_snapshots;
};

struct ScenarioReport {
  std::optional<RunResult> fp;
  std::optional<RunResult> mc;
  ScenarioConfig config;
};

struct SweepReport {
  SweepSpec sweep;
  std::vector<ScenarioReport> runs;  // ordered by swept value
  ScenarioConfig config;
};

// Single run. Per step: read the delayed fraction (feedback only), evaluate
// I1(t), advance the solver(s) one dt, then record and push the new fraction.
ScenarioReport run_scenario(const ScenarioConfig& config);

// One run per swept value; members are independent and may execute in
// parallel, producing a table identical to serial execution.
SweepReport run_sweep(const ScenarioConfig& config, bool parallel = true);

// Returns a copy with the named scalar parameter replaced. Understands D,
// dt, t_end, n_trajectories, plus constant.A, periodic.A, periodic.f,
// feedback.A and feedback.delta_T inside the drive.
ScenarioConfig with_parameter(ScenarioConfig config, const std::string& name,
                              double value);

void emit_outputs(const ScenarioReport& report,
                  const std::filesystem::path& dir);
void emit_outputs(const SweepReport& report, const std::filesystem::path& dir);

// Times {0, every, 2*every, ...} up to t_end.
std::vector<double> snapshot_schedule(double every, double t_end);

}  // namespace fhn
