// Acceptance suite: full-scale end-to-end checks of the reproduction targets,
// one pass/fail line per criterion. Expensive runs are shared between
// criteria; everything is deterministic. Expect a total runtime of tens of
// minutes on two cores.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fhn/model.hpp"
#include "fhn/rng.hpp"
#include "fhn/scenario.hpp"

using namespace fhn;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %-4s %s  %s\n", name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
  char buffer[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// --- criterion 1: deterministic firing threshold ---------------------------

void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  FhnParams params;
  const bool rest_below = classify_response(params, 0.3) == Response::Rest;
  const bool firing_above =
      classify_response(params, 0.4) == Response::Oscillatory;
  const double elapsed = seconds_since(start);
  report("1", rest_below && firing_above && elapsed < 1.0,
         fmt("A=0.3 %s, A=0.4 %s, %.2f s",
             rest_below ? "rest" : "oscillatory",
             firing_above ? "oscillatory" : "rest", elapsed));
}

// --- criterion 2: noise-induced transition ----------------------------------

void criterion_2() {
  const auto low = run_scenario(preset("S1a"));
  const auto high = run_scenario(preset("S1b"));
  const double n_low = low.fp->n[low.fp->n.size() - 1];
  const double n_high = high.fp->n[high.fp->n.size() - 1];

  const auto& field = low.fp->snapshots.back();
  const auto [mi, mj] = mode_cell(field);
  const auto rest = rest_state(low.config.params, 0.0);
  const double cells_u = std::abs(field.grid.u(mi) - rest.u) / field.grid.du;
  const double cells_v = std::abs(field.grid.v(mj) - rest.v) / field.grid.dv;
  const bool mode_ok = cells_u <= 2.0 && cells_v <= 2.0;

  // boundary leakage must stay negligible over the 10^4 steps
  const double mass_kept = high.fp->mass[high.fp->mass.size() - 1];

  const bool ratio_ok = n_high > 10.0 * n_low;
  report("2", ratio_ok && mode_ok && mass_kept >= 0.99,
         fmt("n(0.005)=%.4f n(0.001)=%.4f ratio=%.2f (need >10); mode off by "
             "(%.1f,%.1f) cells; mass kept %.6f",
             n_high, n_low, n_high / n_low, cells_u, cells_v, mass_kept));
}

// --- criteria 3+4: stochastic resonance by both routes ----------------------

struct ResonanceData {
  std::vector<double> d_values;
  std::vector<double> fp_snr, mc_snr;
  double trace_deviation = 0;  // FP vs MC <u(t)>, D=0.005, t in [50,150]
};

ResonanceData resonance_sweep() {
  const auto table = run_sweep(preset("S2"), false);
  ResonanceData data;
  data.d_values = table.sweep.values;
  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    data.fp_snr.push_back(table.runs[i].fp->snr ? table.runs[i].fp->snr->snr_db
                                                : -999);
    data.mc_snr.push_back(table.runs[i].mc->snr ? table.runs[i].mc->snr->snr_db
                                                : -999);
    if (std::abs(data.d_values[i] - 0.005) < 1e-12) {
      const auto& fp = *table.runs[i].fp;
      const auto& mc = *table.runs[i].mc;
      for (Index k = 0; k < fp.time.size(); ++k) {
        if (fp.time[k] < 50 || fp.time[k] > 150) continue;
        data.trace_deviation = std::max(
            data.trace_deviation, std::abs(fp.mean_u[k] - mc.mean_u[k]));
      }
    }
  }
  return data;
}

std::string snr_row(const std::vector<double>& d, const std::vector<double>& s) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i)
    out += fmt("%g:%.1f ", d[i], s[i]);
  return out;
}

bool argmax_at_0005(const std::vector<double>& d, const std::vector<double>& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[best]) best = i;
  if (std::abs(d[best] - 0.005) > 1e-12) return false;
  // both flanks strictly lower
  return s[best] > s[best - 1] && s[best] > s[best + 1];
}

void criterion_3(const ResonanceData& data) {
  report("3", argmax_at_0005(data.d_values, data.fp_snr),
         "fp snr_db by D: " + snr_row(data.d_values, data.fp_snr));
}

void criterion_4(const ResonanceData& data) {
  const bool peak_ok = argmax_at_0005(data.d_values, data.mc_snr);
  const bool trace_ok = data.trace_deviation < 0.15;
  report("4", peak_ok && trace_ok,
         "mc snr_db by D: " + snr_row(data.d_values, data.mc_snr) +
             fmt("; fp-mc trace dev=%.3f (need <0.15)", data.trace_deviation));
}

// --- criterion 5: feedback synchronization ----------------------------------

struct FeedbackRuns {
  // keyed by D in {0.001, 0.005, 0.02}
  std::vector<double> d_values{0.001, 0.005, 0.02};
  std::vector<RunResult> strong;  // A=0.9, delta_T=0.2
  std::vector<RunResult> weak;    // A=0.5, delta_T=0.2
};

FeedbackRuns feedback_runs() {
  FeedbackRuns out;
  for (const double d : out.d_values) {
    auto strong_cfg = with_parameter(preset("S3"), "D", d);
    out.strong.push_back(*run_scenario(strong_cfg).fp);
    auto weak_cfg = with_parameter(strong_cfg, "feedback.A", 0.5);
    out.weak.push_back(*run_scenario(weak_cfg).fp);
  }
  return out;
}

void criterion_5(const FeedbackRuns& runs) {
  const double strong_target[] = {0.05, 0.95, 0.80};
  const double strong_tol[] = {0.05, 0.10, 0.10};
  bool pass = true;
  std::string detail = "A=0.9 n_max: ";
  for (int i = 0; i < 3; ++i) {
    const double got = runs.strong[static_cast<std::size_t>(i)].n_max;
    if (std::abs(got - strong_target[i]) > strong_tol[i]) pass = false;
    detail += fmt("%g:%.3f ", runs.d_values[static_cast<std::size_t>(i)], got);
  }
  detail += "| A=0.5 n_max: ";
  for (int i = 0; i < 3; ++i) {
    const double got = runs.weak[static_cast<std::size_t>(i)].n_max;
    const bool oscillating = got > 0.5;
    const bool should = i == 1;  // only D=0.005 sustains the oscillation
    if (oscillating != should) pass = false;
    detail += fmt("%g:%.3f ", runs.d_values[static_cast<std::size_t>(i)], got);
  }
  report("5", pass, detail);
}

// --- criterion 6: delay degrades synchronization ----------------------------

void criterion_6() {
  const auto s4 = preset("S4");
  const auto table = run_sweep(s4, false);

  // the delta_T=0.2 member measures the cycle the sweep top must reach
  const double f_first = table.runs.front().fp->dominant_frequency;
  const double cycle = 1.0 / f_first;
  const double top = s4.sweep->values.back();
  // the dominant frequency is quantized to ~0.013 by the analysis window,
  // which moves 0.2*cycle by ~0.06; allow that much
  const bool top_matches = std::abs(top - 0.2 * cycle) <= 0.1;

  bool monotone = true;
  std::string detail =
      fmt("cycle=%.3f sweep-top=%.2f; n_max by dT: ", cycle, top);
  for (std::size_t i = 0; i < table.runs.size(); ++i) {
    const double n_max = table.runs[i].fp->n_max;
    if (i > 0 && n_max > table.runs[i - 1].fp->n_max + 0.02) monotone = false;
    detail += fmt("%g:%.3f ", table.sweep.values[i], n_max);
  }
  const double f_last = table.runs.back().fp->dominant_frequency;
  const double drop = (f_first - f_last) / f_first;
  detail += fmt("; freq %.3f->%.3f drop=%.1f%% (need 5-30%%)", f_first, f_last,
                100 * drop);
  report("6", monotone && top_matches && drop >= 0.05 && drop <= 0.30, detail);
}

// --- criterion 7: feedback amplifies a weak periodic signal -----------------

void criterion_7() {
  const auto with_fb = run_scenario(preset("S5"));
  const auto without_fb =
      run_scenario(with_parameter(preset("S5"), "feedback.A", 0.0));
  const double n_with = with_fb.fp->n_max;
  const double n_without = without_fb.fp->n_max;
  const bool pass = n_with >= 0.85 && std::abs(n_without - 0.60) <= 0.10;
  report("7", pass,
         fmt("peak n with feedback=%.3f (need >=0.85), without=%.3f (need "
             "0.60+-0.10)",
             n_with, n_without));
}

// --- criterion 8: always-on property suites ---------------------------------

DensityField smooth_bumps(const GridSpec& grid, std::uint64_t seed) {
  NormalStream rng(seed, 0);
  DensityField field{grid, ArrayXXd::Zero(grid.n_u, grid.n_v)};
  for (int bump = 0; bump < 4; ++bump) {
    const double cu = 0.5 * (grid.u_min + grid.u_max) +
                      0.3 * (grid.u_max - grid.u_min) * std::tanh(rng.next());
    const double cv = 0.5 * (grid.v_min + grid.v_max) +
                      0.3 * (grid.v_max - grid.v_min) * std::tanh(rng.next());
    const double su = 0.05 + 0.2 * std::abs(rng.next());
    const double sv = 0.05 + 0.1 * std::abs(rng.next());
    for (Index i = 1; i < grid.n_u - 1; ++i)
      for (Index j = 1; j < grid.n_v - 1; ++j) {
        const double du = grid.u(i) - cu, dv = grid.v(j) - cv;
        field.values(i, j) +=
            std::exp(-du * du / (2 * su * su) - dv * dv / (2 * sv * sv));
      }
  }
  field.values /= field.values.sum() * grid.cell_area();
  return field;
}

void criterion_8a() {
  const auto grid = GridSpec::make_default();
  FpStepConfig cfg;
  cfg.params.D = 0.005;
  NormalStream rng(88, 0);
  bool pass = true;
  double worst = 0;
  for (std::uint64_t trial = 0; trial < 5 && pass; ++trial) {
    auto field = smooth_bumps(grid, 200 + trial);
    const double input = std::tanh(rng.next());
    for (int k = 0; k < 20; ++k) {
      const double mass_before = total_mass(field);
      const double leak_before = field.leaked_mass;
      fp_step(field, cfg, input);
      if (field.values.minCoeff() < 0) pass = false;
      const double defect = std::abs(total_mass(field) +
                                     (field.leaked_mass - leak_before) -
                                     mass_before);
      worst = std::max(worst, defect);
      if (defect >= 1e-9) pass = false;
    }
  }
  report("8a", pass,
         fmt("positivity + mass accounting, worst defect %.2e (need <1e-9)",
             worst));
}

void criterion_8b() {
  const auto grid = GridSpec::make_default();
  FpStepConfig cfg;
  cfg.params.D = 1e-8;
  NormalStream rng(31, 0);
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    // start points across the rest basin
    const double u0 = -1.2 + 0.5 * std::tanh(rng.next());
    const double v0 = -0.6 + 0.15 * std::tanh(rng.next());
    auto field = init_gaussian(grid, u0, v0, 1e-3, 1e-3);
    const auto path = rk4_trajectory(cfg.params, NeuronState{u0, v0},
                                     [](double) { return 0.0; }, 5.0, 0.01);
    for (int k = 0; k < 500; ++k) {
      fp_step(field, cfg, 0.0);
      const auto m = moments(field);
      const auto& ref = path[static_cast<std::size_t>(k + 1)];
      worst = std::max(worst, std::hypot(m.mean_u - ref.u, m.mean_v - ref.v));
    }
  }
  report("8b", worst < 3 * grid.du,
         fmt("pure-advection centroid error %.4f (need < %.2f)", worst,
             3 * grid.du));
}

void criterion_8c() {
  NormalStream rng(62, 1);
  bool pass = true;
  for (int capacity = 1; capacity <= 100 && pass; ++capacity) {
    DelayBuffer buffer(capacity * 0.01, 0.01, 0.0);
    std::vector<double> pushed;
    for (int k = 0; k < 2 * capacity + 32; ++k) {
      const double sample = std::abs(std::tanh(rng.next()));
      const double delayed = buffer.exchange(sample);
      const double expected = k >= capacity ? pushed[static_cast<std::size_t>(
                                                  k - capacity)]
                                            : 0.0;
      if (delayed != expected) pass = false;
      pushed.push_back(sample);
    }
  }
  report("8c", pass, "delay buffer exact over capacities 1..100");
}

void criterion_8d() {
  EnsembleConfig config;
  config.params.D = 0.005;
  config.t_end = 10;
  config.n_trajectories = 2000;
  config.master_seed = 4096;
  config.n_workers = 1;
  const auto reference = run_ensemble(config);
  bool pass = true;
  for (const int workers : {2, 5}) {
    config.n_workers = workers;
    const auto other = run_ensemble(config);
    if (!(reference.mean_u == other.mean_u).all() ||
        !(reference.supra == other.supra).all() ||
        !(reference.final_histogram.counts == other.final_histogram.counts)
             .all())
      pass = false;
  }
  report("8d", pass, "ensemble bit-identical for 1, 2 and 5 workers");
}

void criterion_8e() {
  NormalStream rng(271828, 0);
  TimeSeries series;
  series.dt = 0.01;
  series.values.resize(1 << 14);
  for (Index i = 0; i < series.values.size(); ++i)
    series.values[i] = rng.next();
  const double variance =
      (series.values - series.values.mean()).square().mean();
  const double total = periodogram(series).power.sum();
  const double error = std::abs(total - variance) / variance;
  report("8e", error < 0.05,
         fmt("parseval: sum(power)=%.4f variance=%.4f err=%.1f%%", total,
             variance, 100 * error));
}

void criterion_8f(const RunResult& base) {
  auto cfg = preset("S3");
  cfg.grid = GridSpec::make(-4.5, 4.5, -2.34, 2.34, 0.015, 0.0065);
  const auto refined = run_scenario(cfg);
  const double delta = std::abs(refined.fp->n_max - base.n_max);
  report("8f", delta < 0.03,
         fmt("n_max default grid %.3f vs halved cells %.3f, delta %.3f "
             "(need <0.03)",
             base.n_max, refined.fp->n_max, delta));
}

void criterion_8g() {
  // stationary density at D=0.005 by both routes, compared on 3x-coarsened
  // cells so the Monte Carlo shot noise stays well under the budget
  const auto coarse = GridSpec::make(-4.5, 4.5, -2.34, 2.34, 0.09, 0.039);

  ScenarioConfig cfg;
  cfg.method = Method::FokkerPlanck;
  cfg.params.D = 0.005;
  cfg.t_end = 200;
  cfg.snapshot_times = {200};
  const auto fp = run_scenario(cfg);
  const DensityField& field = fp.fp->snapshots.back();
  ArrayXXd fp_mass = ArrayXXd::Zero(coarse.n_u, coarse.n_v);
  for (Index i = 0; i < field.grid.n_u; ++i)
    for (Index j = 0; j < field.grid.n_v; ++j) {
      const Index bi = std::min(coarse.u_bin(field.grid.u(i)), coarse.n_u - 1);
      const Index bj = std::min(coarse.v_bin(field.grid.v(j)), coarse.n_v - 1);
      fp_mass(bi, bj) += field.values(i, j) * field.grid.cell_area();
    }

  EnsembleConfig ec;
  ec.params.D = 0.005;
  ec.t_end = 200;
  ec.n_trajectories = 100000;
  ec.master_seed = 314;
  ec.grid = coarse;  // same outer box, so absorption is unchanged
  const auto mc = run_ensemble(ec);
  ArrayXXd mc_mass =
      mc.final_histogram.counts.cast<double>() / double(ec.n_trajectories);

  fp_mass /= fp_mass.sum();
  mc_mass /= mc_mass.sum();
  const double l1 = (fp_mass - mc_mass).abs().sum();
  report("8g", l1 < 0.15,
         fmt("cross-method stationary L1 distance %.3f (need <0.15)", l1));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();

  criterion_1();
  criterion_2();

  const auto resonance = resonance_sweep();
  criterion_3(resonance);
  criterion_4(resonance);

  const auto feedback = feedback_runs();
  criterion_5(feedback);
  criterion_6();
  criterion_7();

  criterion_8a();
  criterion_8b();
  criterion_8c();
  criterion_8d();
  criterion_8e();
  criterion_8f(feedback.strong[1]);
  criterion_8g();

  std::printf("acceptance total: %s (%.0f s)\n",
              failures == 0 ? "PASS" : fmt("%d FAILED", failures).c_str(),
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
