#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fhn/drive.hpp"
#include "fhn/errors.hpp"
#include "fhn/grid.hpp"
#include "fhn/model.hpp"
#include "fhn/rng.hpp"
#include "fhn/types.hpp"

namespace fhn {

// One Euler-Maruyama step; the white noise enters the u equation only and is
// scaled by c:
//   u' = u + dt c (-v + u - u^3/3 + I1) + c sqrt(2 D dt) z
//   v' = v + dt (u - b v + a)
template <typename Scalar>
NeuronStateT<Scalar> em_step(const FhnParamsT<Scalar>& p,
                             const NeuronStateT<Scalar>& s, Scalar input,
                             Scalar dt, Scalar z) {
  const Scalar cubic = s.u - s.u * s.u * s.u / Scalar(3);
  return {s.u + dt * p.c * (-s.v + cubic + input) +
              p.c * std::sqrt(2 * p.D * dt) * z,
          s.v + dt * (s.u - p.b * s.v + p.a)};
}

struct GaussianInit {
  double mean_u = -1.0;
  double mean_v = -0.55;
  double var_u = 0.05;
  double var_v = 0.013;
};

struct EnsembleConfig {
  FhnParams params;
  DriveSpec drive = DriveSpec::constant(0);
  std::int64_t n_trajectories = 10000;
  double dt = 0.01;
  double t_end = 100;
  std::variant<NeuronState, GaussianInit> initial = GaussianInit{};
  std::uint64_t master_seed = 0;
  // Histogram grid; doubles as the absorbing bounding box mirroring the
  // PDE domain. Trajectories that leave it are dropped from later means.
  GridSpec grid = GridSpec::make_default();
  std::vector<double> snapshot_times;
  int n_workers = 0;  // 0 = library default; never affects the results
};

struct Histogram2D {
  ArrayXX<std::int64_t> counts;
  std::int64_t out_of_bounds = 0;
};

// Bin states into node-centered half-open cells (lower edge inclusive);
// states outside the closed grid box are tallied separately.
template <typename Scalar>
Histogram2D histogram2d(std::span<const NeuronStateT<Scalar>> states,
                        const GridSpecT<Scalar>& grid) {
  Histogram2D h;
  h.counts = ArrayXX<std::int64_t>::Zero(grid.n_u, grid.n_v);
  for (const auto& s : states) {
    if (!grid.contains(s.u, s.v)) {
      ++h.out_of_bounds;
      continue;
    }
    ++h.counts(std::min(grid.u_bin(s.u), grid.n_u - 1),
               std::min(grid.v_bin(s.v), grid.n_v - 1));
  }
  return h;
}

struct McSnapshot {
  double time = 0;
  ArrayXXd density;  // counts / (n_trajectories du dv); integrates to the
                     // surviving fraction
};

struct EnsembleRun {
  ArrayXd mean_u, mean_v;    // over surviving trajectories, length steps+1
  ArrayXd supra;             // fraction of survivors with u > 0
  ArrayXd alive_fraction;    // survivors / n_trajectories
  ArrayXd input;             // I1 applied at each step
  Histogram2D final_histogram;
  std::int64_t absorbed = 0;
  std::vector<McSnapshot> snapshots;
  EnsembleConfig config;
};

namespace detail {

inline Index step_count(double t_end, double dt) {
  return static_cast<Index>(std::floor(t_end / dt + 1e-9));
}

}  // namespace detail

// Monte Carlo ensemble of Euler-Maruyama trajectories. Trajectory i draws
// from the Philox stream (master_seed, i): a Gaussian initial state consumes
// the first two samples, each step one more. All trajectories advance in
// lockstep so a feedback drive can read the population fraction; per-step
// statistics are reduced over fixed trajectory blocks in index order, which
// makes the result bit-identical for any worker count.
inline EnsembleRun run_ensemble(const EnsembleConfig& config) {
  if (!(config.dt > 0)) throw ConfigError("run_ensemble: dt must be > 0");
  if (!(config.t_end > config.dt))
    throw ConfigError("run_ensemble: t_end must exceed dt");
  if (config.n_trajectories < 1)
    throw ConfigError("run_ensemble: empty ensemble");
  validate(config.params);
  validate(config.drive);

  const auto& p = config.params;
  const double dt = config.dt;
  const Index n = static_cast<Index>(config.n_trajectories);
  const Index n_steps = detail::step_count(config.t_end, dt);
  const double noise_amp = p.c * std::sqrt(2 * p.D * dt);

  constexpr Index kBlock = 256;
  const Index n_blocks = (n + kBlock - 1) / kBlock;

  std::vector<NeuronState> states(static_cast<std::size_t>(n));
  std::vector<NormalStream> streams;
  streams.reserve(static_cast<std::size_t>(n));
  std::vector<unsigned char> alive(static_cast<std::size_t>(n), 1);

  for (Index i = 0; i < n; ++i)
    streams.emplace_back(config.master_seed, static_cast<std::uint64_t>(i));

  if (const auto* fixed = std::get_if<NeuronState>(&config.initial)) {
    for (Index i = 0; i < n; ++i) states[i] = *fixed;
  } else {
    const auto& gi = std::get<GaussianInit>(config.initial);
    if (!(gi.var_u > 0) || !(gi.var_v > 0))
      throw ConfigError("run_ensemble: initial variances must be > 0");
    const double sd_u = std::sqrt(gi.var_u), sd_v = std::sqrt(gi.var_v);
    for (Index i = 0; i < n; ++i) {
      states[i].u = gi.mean_u + sd_u * streams[i].next();
      states[i].v = gi.mean_v + sd_v * streams[i].next();
    }
  }

  EnsembleRun run;
  run.config = config;
  run.mean_u.resize(n_steps + 1);
  run.mean_v.resize(n_steps + 1);
  run.supra.resize(n_steps + 1);
  run.alive_fraction.resize(n_steps + 1);
  run.input.resize(n_steps + 1);

  std::vector<double> bsum_u(n_blocks), bsum_v(n_blocks);
  std::vector<std::int64_t> bcount(n_blocks), bsupra(n_blocks);

  const bool fb = has_feedback(config.drive);

  const auto tally = [&](Index step_index) {
    for (Index b = 0; b < n_blocks; ++b) {
      bsum_u[b] = bsum_v[b] = 0;
      bcount[b] = bsupra[b] = 0;
      const Index hi = std::min(n, (b + 1) * kBlock);
      for (Index i = b * kBlock; i < hi; ++i) {
        if (!alive[i]) continue;
        bsum_u[b] += states[i].u;
        bsum_v[b] += states[i].v;
        ++bcount[b];
        if (states[i].u > 0) ++bsupra[b];
      }
    }
    double su = 0, sv = 0;
    std::int64_t count = 0, supra = 0;
    for (Index b = 0; b < n_blocks; ++b) {
      su += bsum_u[b];
      sv += bsum_v[b];
      count += bcount[b];
      supra += bsupra[b];
    }
    run.mean_u[step_index] = su / double(count);
    run.mean_v[step_index] = sv / double(count);
    run.supra[step_index] = double(supra) / double(count);
    run.alive_fraction[step_index] = double(count) / double(n);
  };

  // initial absorption check, then t=0 statistics
  for (Index i = 0; i < n; ++i)
    if (!config.grid.contains(states[i].u, states[i].v)) alive[i] = 0;
  tally(0);

  std::vector<double> snapshot_times = config.snapshot_times;
  std::sort(snapshot_times.begin(), snapshot_times.end());
  auto next_snapshot = snapshot_times.begin();
  const auto maybe_snapshot = [&](Index step_index) {
    while (next_snapshot != snapshot_times.end() &&
           static_cast<Index>(std::floor(*next_snapshot / dt + 0.5)) ==
               step_index) {
      std::vector<NeuronState> kept;
      kept.reserve(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i)
        if (alive[i]) kept.push_back(states[i]);
      const auto hist = histogram2d<double>(kept, config.grid);
      McSnapshot snap;
      snap.time = double(step_index) * dt;
      snap.density = hist.counts.cast<double>() /
                     (double(n) * config.grid.cell_area());
      run.snapshots.push_back(std::move(snap));
      ++next_snapshot;
    }
  };
  maybe_snapshot(0);

  DelayBuffer buffer(fb ? first_feedback(config.drive)->delay : 0.0, dt,
                     run.supra[0]);

#ifdef _OPENMP
  const int n_workers = config.n_workers > 0
                            ? config.n_workers
                            : std::min<int>(omp_get_max_threads(),
                                            static_cast<int>(n_blocks));
#endif

  for (Index k = 0; k < n_steps; ++k) {
    const double t = double(k) * dt;
    const double delayed = fb ? buffer.exchange(run.supra[k]) : 0.0;
    const double input = current_with_delayed(config.drive, t, delayed);
    run.input[k] = input;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_workers)
#endif
    for (Index b = 0; b < n_blocks; ++b) {
      double su = 0, sv = 0;
      std::int64_t count = 0, supra = 0;
      const Index hi = std::min(n, (b + 1) * kBlock);
      for (Index i = b * kBlock; i < hi; ++i) {
        if (!alive[i]) continue;
        const double z = streams[i].next();
        const NeuronState& s = states[i];
        const double cubic = s.u - s.u * s.u * s.u / 3.0;
        const NeuronState next{
            s.u + dt * p.c * (-s.v + cubic + input) + noise_amp * z,
            s.v + dt * (s.u - p.b * s.v + p.a)};
        if (!config.grid.contains(next.u, next.v)) {
          alive[i] = 0;
          continue;
        }
        states[i] = next;
        su += next.u;
        sv += next.v;
        ++count;
        if (next.u > 0) ++supra;
      }
      bsum_u[b] = su;
      bsum_v[b] = sv;
      bcount[b] = count;
      bsupra[b] = supra;
    }

    double su = 0, sv = 0;
    std::int64_t count = 0, supra = 0;
    for (Index b = 0; b < n_blocks; ++b) {
      su += bsum_u[b];
      sv += bsum_v[b];
      count += bcount[b];
      supra += bsupra[b];
    }
    run.mean_u[k + 1] = su / double(count);
    run.mean_v[k + 1] = sv / double(count);
    run.supra[k + 1] = double(supra) / double(count);
    run.alive_fraction[k + 1] = double(count) / double(n);
    maybe_snapshot(k + 1);
  }

  run.input[n_steps] = current_with_delayed(
      config.drive, double(n_steps) * dt, fb ? buffer.peek() : 0.0);

  std::vector<NeuronState> kept;
  kept.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (alive[i]) kept.push_back(states[i]);
  run.final_histogram = histogram2d<double>(kept, config.grid);
  run.absorbed = n - static_cast<std::int64_t>(kept.size());
  return run;
}

}  // namespace fhn
