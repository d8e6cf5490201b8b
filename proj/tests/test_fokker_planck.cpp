#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fhn/fokker_planck.hpp"
#include "fhn/model.hpp"
#include "fhn/rng.hpp"

using namespace fhn;

namespace {

// Smooth strictly positive random field: a few Gaussian bumps well inside
// the domain, normalized to unit mass.
DensityField random_smooth_field(const GridSpec& grid, std::uint64_t seed) {
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

}  // namespace

TEST_CASE("grid spec construction") {
  const auto grid = GridSpec::make_default();
  CHECK(grid.n_u == 301);
  CHECK(grid.n_v == 361);
  CHECK(grid.u(150) == doctest::Approx(0.0));
  CHECK_THROWS_AS(GridSpec::make(0, 1, 0, 1, 0.3, 0.5), GridError);
  CHECK_THROWS_AS(GridSpec::make(0, -1, 0, 1, 0.1, 0.1), GridError);
}

TEST_CASE("gaussian initialization") {
  const auto grid = GridSpec::make_default();
  const auto field = init_gaussian(grid, -1.0, -0.55, 0.05, 0.013);
  CHECK(std::abs(total_mass(field) - 1.0) < 1e-12);
  CHECK(field.leaked_mass == 0);

  const auto m = moments(field);
  CHECK(std::abs(m.mean_u - (-1.0)) < 0.5 * grid.du);
  CHECK(std::abs(m.mean_v - (-0.55)) < 0.5 * grid.dv);
  CHECK(m.var_u == doctest::Approx(0.05).epsilon(0.02));
  CHECK(m.var_v == doctest::Approx(0.013).epsilon(0.02));

  const auto centered = init_gaussian(grid, 0.0, 0.0, 0.05, 0.013);
  CHECK(std::abs(moments(centered).mean_u) < 1e-10);

  CHECK_THROWS_AS(init_gaussian(grid, -9.0, 0.0, 0.05, 0.013), GridError);
  CHECK_THROWS_AS(init_gaussian(grid, 0.0, 0.0, -0.05, 0.013), GridError);
}

TEST_CASE("moments of degenerate and mirrored densities") {
  const auto grid = GridSpec::make(-2, 2, -1, 1, 0.1, 0.05);

  DensityField single{grid, ArrayXXd::Zero(grid.n_u, grid.n_v)};
  single.values(12, 30) = 7.0;
  const auto ms = moments(single);
  CHECK(ms.mean_u == doctest::Approx(grid.u(12)));
  CHECK(ms.mean_v == doctest::Approx(grid.v(30)));
  CHECK(ms.var_u == doctest::Approx(0.0));
  CHECK(ms.var_v == doctest::Approx(0.0));

  auto field = random_smooth_field(grid, 5);
  DensityField mirrored = field;
  for (Index i = 0; i < grid.n_u; ++i)
    for (Index j = 0; j < grid.n_v; ++j)
      mirrored.values(i, j) =
          field.values(i, j) +
          field.values(grid.n_u - 1 - i, grid.n_v - 1 - j);
  const auto mm = moments(mirrored);
  CHECK(std::abs(mm.mean_u) < 1e-10);
  CHECK(std::abs(mm.mean_v) < 1e-10);

  DensityField empty{grid, ArrayXXd::Zero(grid.n_u, grid.n_v)};
  CHECK_THROWS_AS(moments(empty), EmptyDensity);
  CHECK_THROWS_AS(supra_fraction(empty), EmptyDensity);
  CHECK(total_mass(empty) == 0.0);
}

TEST_CASE("supra-threshold fraction") {
  const auto grid = GridSpec::make_default();

  const auto start = init_gaussian(grid, -1.0, -0.55, 0.05, 0.013);
  const double n0 = supra_fraction(start);
  CHECK(n0 < 1e-4);
  CHECK(n0 == doctest::Approx(4e-6).epsilon(1.0));  // analytic tail ~ 3.9e-6

  auto positive = init_gaussian(grid, 2.0, 0.0, 0.05, 0.013);
  CHECK(supra_fraction(positive) == doctest::Approx(1.0));

  // symmetric in u about zero: exactly half, the u=0 column split evenly
  auto field = random_smooth_field(grid, 11);
  DensityField symmetric = field;
  for (Index i = 0; i < grid.n_u; ++i)
    for (Index j = 0; j < grid.n_v; ++j)
      symmetric.values(i, j) =
          field.values(i, j) + field.values(grid.n_u - 1 - i, j);
  CHECK(supra_fraction(symmetric) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("zero field steps to zero field") {
  const auto grid = GridSpec::make(-3, 3, -2, 2, 0.1, 0.1);
  DensityField field{grid, ArrayXXd::Zero(grid.n_u, grid.n_v)};
  field.leaked_mass = 0.25;
  FpStepConfig cfg;
  cfg.params.D = 0.005;
  fp_step(field, cfg, 0.3);
  CHECK(field.values.abs().maxCoeff() == 0.0);
  CHECK(field.leaked_mass == doctest::Approx(0.25));
  CHECK(field.time == doctest::Approx(0.01));
  CHECK(field.steps == 1);
}

TEST_CASE("mass is conserved step by step and density stays non-negative") {
  const auto grid = GridSpec::make_default();
  FpStepConfig cfg;
  cfg.params.D = 0.005;
  NormalStream rng(17, 4);
  for (std::uint64_t trial = 0; trial < 5; ++trial) {
    auto field = random_smooth_field(grid, 100 + trial);
    const double input = std::tanh(rng.next());  // within [-1, 1]
    for (int k = 0; k < 20; ++k) {
      const double mass_before = total_mass(field);
      const double leak_before = field.leaked_mass;
      fp_step(field, cfg, input);
      const double mass_after = total_mass(field);
      const double leak_after = field.leaked_mass;
      CHECK(field.values.minCoeff() >= 0.0);
      CHECK(std::abs(mass_after + (leak_after - leak_before) - mass_before) <
            1e-9);
    }
  }
}

TEST_CASE("a narrow packet is advected along the deterministic flow") {
  const auto grid = GridSpec::make_default();
  FpStepConfig cfg;
  cfg.params.D = 1e-8;
  auto field = init_gaussian(grid, -1.0, -0.55, 1e-3, 1e-3);

  const auto path = rk4_trajectory(cfg.params, NeuronState{-1.0, -0.55},
                                   [](double) { return 0.0; }, 5.0, 0.01);
  double worst = 0;
  for (int k = 0; k < 500; ++k) {
    fp_step(field, cfg, 0.0);
    const auto m = moments(field);
    const auto& ref = path[static_cast<std::size_t>(k + 1)];
    worst = std::max(worst, std::hypot(m.mean_u - ref.u, m.mean_v - ref.v));
  }
  CHECK(worst < 3 * grid.du);
}

TEST_CASE("corrupted fields are rejected") {
  const auto grid = GridSpec::make(-3, 3, -2, 2, 0.1, 0.1);
  FpStepConfig cfg;
  cfg.params.D = 0.005;

  auto poisoned = init_gaussian(grid, 0.0, 0.0, 0.05, 0.013);
  poisoned.values(5, 5) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(fp_step(poisoned, cfg, 0.0), StabilityError);

  auto negative = init_gaussian(grid, 0.0, 0.0, 0.05, 0.013);
  negative.values(5, 5) = -1.0;
  CHECK_THROWS_AS(fp_step(negative, cfg, 0.0), StabilityError);
}

TEST_CASE("density snapshots round-trip") {
  const auto grid = GridSpec::make(-3, 3, -1.5, 1.5, 0.05, 0.05);
  auto field = init_gaussian(grid, -1.0, -0.55, 0.05, 0.013);
  FpStepConfig cfg;
  cfg.params.D = 0.005;
  for (int k = 0; k < 10; ++k) fp_step(field, cfg, 0.1);

  std::stringstream buffer;
  write_density(buffer, field);
  const auto loaded = read_density(buffer);

  CHECK(loaded.grid == field.grid);
  CHECK(loaded.time == doctest::Approx(field.time));
  CHECK(loaded.leaked_mass == doctest::Approx(field.leaked_mass));
  CHECK(std::abs(total_mass(loaded) - total_mass(field)) < 1e-9);
  CHECK((loaded.values - field.values).abs().maxCoeff() <
        1e-8 * field.values.maxCoeff());
}
