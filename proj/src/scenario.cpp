#include "fhn/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

namespace fhn {

namespace {

// Spectral observables skip the approach to the attractor.
constexpr double kSpectralTransient = 50.0;

Index step_count(double t_end, double dt) {
  return static_cast<Index>(std::floor(t_end / dt + 1e-9));
}

double parse_number(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double value = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': " + text);
  }
}

std::vector<double> parse_number_list(const std::string& key,
                                      const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number(key, item));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::FokkerPlanck: return "fp";
    case Method::MonteCarlo: return "mc";
    case Method::Both: return "both";
  }
  return "fp";
}

Method method_from_string(const std::string& name) {
  if (name == "fp" || name == "fokker_planck") return Method::FokkerPlanck;
  if (name == "mc" || name == "monte_carlo") return Method::MonteCarlo;
  if (name == "both") return Method::Both;
  throw ConfigError("unknown method '" + name + "' (expected fp|mc|both)");
}

void validate(const ScenarioConfig& config) {
  validate(config.params);
  validate(config.drive);
  if (!(config.dt > 0)) throw ConfigError("dt must be > 0");
  if (!(config.t_end > config.dt)) throw ConfigError("t_end must exceed dt");
  if (config.n_trajectories < 1)
    throw ConfigError("n_trajectories must be >= 1");
  for (const double t : config.snapshot_times)
    if (t < 0 || t > config.t_end + 1e-9)
      throw ConfigError("snapshot time outside [0, t_end]");
  if (config.sweep) {
    if (config.sweep->parameter.empty())
      throw ConfigError("sweep.parameter must name one scalar parameter");
    if (config.sweep->values.empty())
      throw ConfigError("sweep.values must not be empty");
  }
  // one shared delay line; several feedback terms would need their own
  int feedback_terms = 0;
  detail::visit_drive(config.drive, [&](const auto& node) {
    if constexpr (std::is_same_v<std::decay_t<decltype(node)>, FeedbackDrive>)
      ++feedback_terms;
  });
  if (feedback_terms > 1)
    throw ConfigError("at most one feedback term per drive is supported");
  if (const auto fb = first_feedback(config.drive)) {
    const double steps = fb->delay / config.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      throw ConfigError("feedback.delta_T must be a multiple of dt");
  }
}

// --- config file -----------------------------------------------------------

ScenarioConfig parse_config(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value', got: " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  ScenarioConfig config;
  double u_min = -4.5, u_max = 4.5, v_min = -2.34, v_max = 2.34;
  double du = 0.03, dv = 0.013;
  std::optional<double> drv_const_A, drv_per_A, drv_per_f, drv_fb_A, drv_fb_dT;
  std::optional<std::string> sweep_param;
  std::optional<std::vector<double>> sweep_values;

  for (const auto& [key, value] : kv) {
    if (key == "method") config.method = method_from_string(value);
    else if (key == "a") config.params.a = parse_number(key, value);
    else if (key == "b") config.params.b = parse_number(key, value);
    else if (key == "c") config.params.c = parse_number(key, value);
    else if (key == "D") config.params.D = parse_number(key, value);
    else if (key == "t_end") config.t_end = parse_number(key, value);
    else if (key == "dt") config.dt = parse_number(key, value);
    else if (key == "seed")
      config.seed = static_cast<std::uint64_t>(parse_number(key, value));
    else if (key == "n_trajectories")
      config.n_trajectories = static_cast<std::int64_t>(parse_number(key, value));
    else if (key == "output_dir") config.output_dir = value;
    else if (key == "init.mean_u") config.init.mean_u = parse_number(key, value);
    else if (key == "init.mean_v") config.init.mean_v = parse_number(key, value);
    else if (key == "init.var_u") config.init.var_u = parse_number(key, value);
    else if (key == "init.var_v") config.init.var_v = parse_number(key, value);
    else if (key == "grid.u_min") u_min = parse_number(key, value);
    else if (key == "grid.u_max") u_max = parse_number(key, value);
    else if (key == "grid.v_min") v_min = parse_number(key, value);
    else if (key == "grid.v_max") v_max = parse_number(key, value);
    else if (key == "grid.du") du = parse_number(key, value);
    else if (key == "grid.dv") dv = parse_number(key, value);
    else if (key == "drive.constant.A") drv_const_A = parse_number(key, value);
    else if (key == "drive.periodic.A") drv_per_A = parse_number(key, value);
    else if (key == "drive.periodic.f") drv_per_f = parse_number(key, value);
    else if (key == "drive.feedback.A") drv_fb_A = parse_number(key, value);
    else if (key == "drive.feedback.delta_T") drv_fb_dT = parse_number(key, value);
    else if (key == "snapshot_times")
      config.snapshot_times = parse_number_list(key, value);
    else if (key == "sweep.parameter") sweep_param = value;
    else if (key == "sweep.values") sweep_values = parse_number_list(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  }

  config.grid = GridSpec::make(u_min, u_max, v_min, v_max, du, dv);

  std::vector<DriveSpec> terms;
  if (drv_const_A) terms.push_back(DriveSpec::constant(*drv_const_A));
  if (drv_per_A || drv_per_f) {
    if (!drv_per_A || !drv_per_f)
      throw ConfigError("periodic drive needs both drive.periodic.A and .f");
    terms.push_back(DriveSpec::periodic(*drv_per_A, *drv_per_f));
  }
  if (drv_fb_A || drv_fb_dT) {
    if (!drv_fb_A || !drv_fb_dT)
      throw ConfigError(
          "feedback drive needs both drive.feedback.A and .delta_T");
    terms.push_back(DriveSpec::feedback(*drv_fb_A, *drv_fb_dT));
  }
  if (terms.size() == 1)
    config.drive = std::move(terms.front());
  else if (terms.size() > 1)
    config.drive = DriveSpec::sum(std::move(terms));

  if (sweep_param || sweep_values) {
    if (!sweep_param || !sweep_values)
      throw ConfigError("sweep needs both sweep.parameter and sweep.values");
    config.sweep = SweepSpec{*sweep_param, *sweep_values};
  }

  std::sort(config.snapshot_times.begin(), config.snapshot_times.end());
  validate(config);
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  return parse_config(is);
}

void write_config(std::ostream& os, const ScenarioConfig& config) {
  os << std::setprecision(9);
  os << "method = " << to_string(config.method) << "\n";
  os << "a = " << config.params.a << "\nb = " << config.params.b
     << "\nc = " << config.params.c << "\nD = " << config.params.D << "\n";
  os << "t_end = " << config.t_end << "\ndt = " << config.dt << "\n";
  os << "seed = " << config.seed << "\n";
  os << "n_trajectories = " << config.n_trajectories << "\n";
  os << "output_dir = " << config.output_dir << "\n";
  os << "init.mean_u = " << config.init.mean_u
     << "\ninit.mean_v = " << config.init.mean_v
     << "\ninit.var_u = " << config.init.var_u
     << "\ninit.var_v = " << config.init.var_v << "\n";
  os << "grid.u_min = " << config.grid.u_min
     << "\ngrid.u_max = " << config.grid.u_max
     << "\ngrid.v_min = " << config.grid.v_min
     << "\ngrid.v_max = " << config.grid.v_max
     << "\ngrid.du = " << config.grid.du << "\ngrid.dv = " << config.grid.dv
     << "\n";
  detail::visit_drive(config.drive, [&](const auto& node) {
    using T = std::decay_t<decltype(node)>;
    if constexpr (std::is_same_v<T, ConstantDrive>) {
      os << "drive.constant.A = " << node.amplitude << "\n";
    } else if constexpr (std::is_same_v<T, PeriodicDrive>) {
      os << "drive.periodic.A = " << node.amplitude << "\n";
      os << "drive.periodic.f = " << node.frequency << "\n";
    } else if constexpr (std::is_same_v<T, FeedbackDrive>) {
      os << "drive.feedback.A = " << node.gain << "\n";
      os << "drive.feedback.delta_T = " << node.delay << "\n";
    }
  });
  if (!config.snapshot_times.empty()) {
    os << "snapshot_times = ";
    for (std::size_t i = 0; i < config.snapshot_times.size(); ++i)
      os << (i ? ", " : "") << config.snapshot_times[i];
    os << "\n";
  }
  if (config.sweep) {
    os << "sweep.parameter = " << config.sweep->parameter << "\n";
    os << "sweep.values = ";
    for (std::size_t i = 0; i < config.sweep->values.size(); ++i)
      os << (i ? ", " : "") << config.sweep->values[i];
    os << "\n";
  }
}

// --- presets ---------------------------------------------------------------

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"S1a", "S1b", "S2", "S2-fig2",
                                              "S3", "S4", "S5"};
  return names;
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig cfg;  // defaults: standard grid, rest-centered Gaussian
  if (name == "S1a" || name == "S1b") {
    // stationary response to noise alone
    cfg.method = Method::FokkerPlanck;
    cfg.params.D = (name == "S1a") ? 0.001 : 0.005;
    cfg.drive = DriveSpec::constant(0);
    cfg.t_end = 100;
    cfg.snapshot_times = {100};
    cfg.seed = 1;
  } else if (name == "S2") {
    // periodic force + noise; response maximized at intermediate D
    cfg.method = Method::Both;
    cfg.params.D = 0.005;
    cfg.drive = DriveSpec::periodic(0.15, 0.55);
    cfg.t_end = 300;
    cfg.snapshot_times = {100, 120, 140};
    cfg.sweep = SweepSpec{"D", {0.001, 0.0025, 0.005, 0.01, 0.02}};
    cfg.seed = 2;
  } else if (name == "S2-fig2") {
    // single-ensemble variant at the alternative forcing amplitude
    cfg.method = Method::MonteCarlo;
    cfg.params.D = 0.005;
    cfg.drive = DriveSpec::periodic(0.17, 0.55);
    cfg.t_end = 300;
    cfg.sweep = SweepSpec{"D", {0.001, 0.0025, 0.005, 0.01, 0.02}};
    cfg.seed = 3;
  } else if (name == "S3") {
    // strong delayed mean-field feedback
    cfg.method = Method::FokkerPlanck;
    cfg.params.D = 0.005;
    cfg.drive = DriveSpec::feedback(0.9, 0.2);
    cfg.t_end = 150;
    cfg.seed = 4;
  } else if (name == "S4") {
    // longer conduction delays degrade synchronization; the top value is
    // about a fifth of the measured S3 cycle (T ~ 4.7)
    cfg.method = Method::FokkerPlanck;
    cfg.params.D = 0.005;
    cfg.drive = DriveSpec::feedback(0.9, 0.2);
    cfg.t_end = 150;
    cfg.sweep = SweepSpec{"feedback.delta_T", {0.2, 0.4, 0.6, 0.8, 0.9}};
    cfg.seed = 5;
  } else if (name == "S5") {
    // periodic force amplified by feedback
    cfg.method = Method::FokkerPlanck;
    cfg.params.D = 0.005;
    cfg.drive = DriveSpec::sum(
        {DriveSpec::periodic(0.5, 0.55), DriveSpec::feedback(0.5, 1.36)});
    cfg.t_end = 150;
    cfg.seed = 6;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return cfg;
}

// --- engine ----------------------------------------------------------------

namespace {

// n_max, dominant frequency of n(t) and the SNR of <u(t)>.
void finalize_result(RunResult& r, const ScenarioConfig& config) {
  const Index n_samples = r.n.size();
  Index half = 0;
  while (half < n_samples && r.time[half] < config.t_end / 2) ++half;

  r.n_max = 0;
  for (Index i = half; i < n_samples; ++i) r.n_max = std::max(r.n_max, r.n[i]);

  const Index tail = n_samples - half;
  if (tail >= 16) {
    TimeSeries seg{r.n.segment(half, tail), config.dt, r.time[half]};
    const PowerSpectrum ps = periodogram(seg);
    Index k = 0;
    ps.power.maxCoeff(&k);
    r.dominant_frequency = ps.frequency[k];
  }

  if (const auto per = first_periodic(config.drive)) {
    Index from = 0;
    while (from < n_samples && r.time[from] < kSpectralTransient) ++from;
    const Index len = n_samples - from;
    if (len >= 16) {
      const double f_min = 1.0 / (double(len) * config.dt);
      const double f_max = 1.0 / (2.0 * config.dt);
      if (per->frequency > f_min && per->frequency < f_max) {
        TimeSeries seg{r.mean_u.segment(from, len), config.dt, r.time[from]};
        r.snr = snr(seg, per->frequency);
      }
    }
  }
}

RunResult run_fokker_planck(const ScenarioConfig& config) {
  const Index n_steps = step_count(config.t_end, config.dt);
  DensityField field = init_gaussian(config.grid, config.init.mean_u,
                                     config.init.mean_v, config.init.var_u,
                                     config.init.var_v);
  const FpStepConfig step_cfg{config.dt, config.params};
  const bool fb = has_feedback(config.drive);

  RunResult r;
  r.time.resize(n_steps + 1);
  r.mean_u.resize(n_steps + 1);
  r.mean_v.resize(n_steps + 1);
  r.n.resize(n_steps + 1);
  r.input.resize(n_steps + 1);
  r.mass.resize(n_steps + 1);

  double n_now = supra_fraction(field);
  DelayBuffer buffer(fb ? first_feedback(config.drive)->delay : 0.0, config.dt,
                     n_now);

  const auto record = [&](Index k) {
    const Moments m = moments(field);
    r.time[k] = double(k) * config.dt;
    r.mean_u[k] = m.mean_u;
    r.mean_v[k] = m.mean_v;
    r.n[k] = n_now;
    r.mass[k] = total_mass(field);
  };
  record(0);

  std::vector<Index> snapshot_steps;
  snapshot_steps.reserve(config.snapshot_times.size());
  for (const double t : config.snapshot_times)
    snapshot_steps.push_back(
        static_cast<Index>(std::floor(t / config.dt + 0.5)));
  auto next_snapshot = snapshot_steps.begin();
  const auto maybe_snapshot = [&](Index k) {
    while (next_snapshot != snapshot_steps.end() && *next_snapshot == k) {
      r.snapshots.push_back(field);
      ++next_snapshot;
    }
  };
  maybe_snapshot(0);

  for (Index k = 0; k < n_steps; ++k) {
    const double delayed = fb ? buffer.exchange(n_now) : 0.0;
    const double input =
        current_with_delayed(config.drive, double(k) * config.dt, delayed);
    r.input[k] = input;
    fp_step(field, step_cfg, input);
    n_now = supra_fraction(field);
    record(k + 1);
    maybe_snapshot(k + 1);
  }
  r.input[n_steps] = current_with_delayed(
      config.drive, double(n_steps) * config.dt, fb ? buffer.peek() : 0.0);
  r.leaked_mass = field.leaked_mass;

  finalize_result(r, config);
  return r;
}

RunResult run_monte_carlo(const ScenarioConfig& config) {
  EnsembleConfig ec;
  ec.params = config.params;
  ec.drive = config.drive;
  ec.n_trajectories = config.n_trajectories;
  ec.dt = config.dt;
  ec.t_end = config.t_end;
  ec.initial = config.init;
  ec.master_seed = config.seed;
  ec.grid = config.grid;
  ec.snapshot_times = config.snapshot_times;
  const EnsembleRun run = run_ensemble(ec);

  const Index n_samples = run.mean_u.size();
  RunResult r;
  r.time.resize(n_samples);
  for (Index k = 0; k < n_samples; ++k) r.time[k] = double(k) * config.dt;
  r.mean_u = run.mean_u;
  r.mean_v = run.mean_v;
  r.n = run.supra;
  r.input = run.input;
  r.mass = run.alive_fraction;
  r.leaked_mass =
      double(run.absorbed) / double(config.n_trajectories);
  r.mc_snapshots = run.snapshots;

  finalize_result(r, config);
  return r;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& config) {
  validate(config);
  ScenarioReport report;
  report.config = config;
  if (config.method == Method::FokkerPlanck || config.method == Method::Both)
    report.fp = run_fokker_planck(config);
  if (config.method == Method::MonteCarlo || config.method == Method::Both)
    report.mc = run_monte_carlo(config);
  return report;
}

ScenarioConfig with_parameter(ScenarioConfig config, const std::string& name,
                              double value) {
  if (name == "D") {
    config.params.D = value;
    return config;
  }
  if (name == "dt") {
    config.dt = value;
    return config;
  }
  if (name == "t_end") {
    config.t_end = value;
    return config;
  }
  if (name == "n_trajectories") {
    config.n_trajectories = static_cast<std::int64_t>(value);
    return config;
  }

  bool applied = false;
  const std::function<void(DriveSpec&)> apply = [&](DriveSpec& spec) {
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, ConstantDrive>) {
            if (!applied && name == "constant.A") {
              node.amplitude = value;
              applied = true;
            }
          } else if constexpr (std::is_same_v<T, PeriodicDrive>) {
            if (!applied && name == "periodic.A") {
              node.amplitude = value;
              applied = true;
            } else if (!applied && name == "periodic.f") {
              node.frequency = value;
              applied = true;
            }
          } else if constexpr (std::is_same_v<T, FeedbackDrive>) {
            if (!applied && name == "feedback.A") {
              node.gain = value;
              applied = true;
            } else if (!applied && name == "feedback.delta_T") {
              node.delay = value;
              applied = true;
            }
          } else {
            for (auto& term : node.terms) apply(term);
          }
        },
        spec.node);
  };
  apply(config.drive);
  if (!applied)
    throw ConfigError("unknown sweep parameter '" + name + "'");
  return config;
}

SweepReport run_sweep(const ScenarioConfig& config, bool parallel) {
  validate(config);
  if (!config.sweep) throw ConfigError("config has no sweep section");

  SweepReport report;
  report.config = config;
  report.sweep = *config.sweep;
  std::sort(report.sweep.values.begin(), report.sweep.values.end());

  std::vector<ScenarioConfig> members;
  members.reserve(report.sweep.values.size());
  for (const double value : report.sweep.values) {
    ScenarioConfig member =
        with_parameter(config, report.sweep.parameter, value);
    member.sweep.reset();
    members.push_back(std::move(member));
  }

  report.runs.resize(members.size());
  if (parallel && members.size() > 1) {
    std::vector<std::future<ScenarioReport>> futures;
    futures.reserve(members.size());
    for (const auto& member : members)
      futures.push_back(std::async(std::launch::async, run_scenario, member));
    for (std::size_t i = 0; i < futures.size(); ++i)
      report.runs[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < members.size(); ++i)
      report.runs[i] = run_scenario(members[i]);
  }
  return report;
}

// --- outputs ---------------------------------------------------------------

namespace {

std::string format_value(double value) {
  std::ostringstream os;
  os << std::setprecision(9) << value;
  return os.str();
}

void write_timeseries(const std::filesystem::path& path, const RunResult& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(9);
  os << "t,mean_u,mean_v,n,I1,total_mass\n";
  for (Index k = 0; k < r.time.size(); ++k)
    os << r.time[k] << ',' << r.mean_u[k] << ',' << r.mean_v[k] << ','
       << r.n[k] << ',' << r.input[k] << ',' << r.mass[k] << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

void write_report_txt(const std::filesystem::path& path, const RunResult& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(9);
  os << "n_max " << r.n_max << "\n";
  os << "dominant_frequency " << r.dominant_frequency << "\n";
  if (r.snr) os << "snr_db " << r.snr->snr_db << "\n";
  os << "leaked_mass " << r.leaked_mass << "\n";
  if (!os) throw IoError("failed writing " + path.string());
}

std::string snapshot_name(double time) {
  std::ostringstream os;
  os << "snapshot_t" << std::setprecision(9) << time << ".txt";
  return os.str();
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& r,
                       const GridSpec& grid) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  write_timeseries(dir / "timeseries.csv", r);
  write_report_txt(dir / "report.txt", r);
  for (const auto& snap : r.snapshots)
    write_density(dir / snapshot_name(snap.time), snap);
  for (const auto& snap : r.mc_snapshots) {
    DensityField field{grid, snap.density, snap.time};
    field.leaked_mass = 1.0 - total_mass(field);
    write_density(dir / snapshot_name(snap.time), field);
  }
}

}  // namespace

void emit_outputs(const ScenarioReport& report,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  {
    std::ofstream os(dir / "config.txt");
    if (!os) throw IoError("cannot write config echo");
    write_config(os, report.config);
  }
  const bool both = report.fp && report.mc;
  if (report.fp)
    write_run_outputs(both ? dir / "fp" : dir, *report.fp, report.config.grid);
  if (report.mc)
    write_run_outputs(both ? dir / "mc" : dir, *report.mc, report.config.grid);
}

void emit_outputs(const SweepReport& report,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string());
  {
    std::ofstream os(dir / "config.txt");
    if (!os) throw IoError("cannot write config echo");
    write_config(os, report.config);
  }

  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw IoError("cannot write sweep.csv");
  csv << std::setprecision(9);
  const bool has_fp = !report.runs.empty() && report.runs.front().fp.has_value();
  const bool has_mc = !report.runs.empty() && report.runs.front().mc.has_value();
  csv << report.sweep.parameter;
  const auto emit_header = [&](const std::string& prefix) {
    csv << ',' << prefix << "n_max," << prefix << "dominant_frequency,"
        << prefix << "snr_db," << prefix << "leaked_mass";
  };
  if (has_fp) emit_header(has_mc ? "fp_" : "");
  if (has_mc) emit_header(has_fp ? "mc_" : "");
  csv << '\n';

  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    csv << report.sweep.values[i];
    const auto emit_row = [&](const RunResult& r) {
      csv << ',' << r.n_max << ',' << r.dominant_frequency << ','
          << (r.snr ? format_value(r.snr->snr_db) : std::string("nan")) << ','
          << r.leaked_mass;
    };
    if (has_fp) emit_row(*report.runs[i].fp);
    if (has_mc) emit_row(*report.runs[i].mc);
    csv << '\n';

    std::ostringstream sub;
    sub << report.sweep.parameter << '=' << std::setprecision(9)
        << report.sweep.values[i];
    emit_outputs(report.runs[i], dir / sub.str());
  }
  if (!csv) throw IoError("failed writing sweep.csv");
}

std::vector<double> snapshot_schedule(double every, double t_end) {
  if (!(every > 0)) throw ConfigError("snapshot interval must be > 0");
  std::vector<double> times;
  for (double t = 0; t <= t_end + 1e-9; t += every) times.push_back(t);
  return times;
}

}  // namespace fhn
