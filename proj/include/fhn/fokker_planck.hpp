#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fhn/errors.hpp"
#include "fhn/grid.hpp"
#include "fhn/model.hpp"
#include "fhn/types.hpp"

namespace fhn {

// Probability density rho(u,v) sampled at grid nodes, plus the mass that has
// left through the absorbing boundary. Under pure time stepping from a
// normalized start, total_mass(field) + leaked_mass stays 1.
template <typename Scalar = double>
struct DensityFieldT {
  GridSpecT<Scalar> grid;
  ArrayXX<Scalar> values;  // n_u x n_v
  Scalar time = 0;
  Scalar leaked_mass = 0;
  std::int64_t steps = 0;  // parity picks the sweep order
};
using DensityField = DensityFieldT<double>;

template <typename Scalar = double>
struct FpStepConfigT {
  Scalar dt = Scalar(0.01);
  FhnParamsT<Scalar> params;
};
using FpStepConfig = FpStepConfigT<double>;

template <typename Scalar>
Scalar total_mass(const DensityFieldT<Scalar>& field) {
  return field.values.sum() * field.grid.cell_area();
}

// Product Gaussian sampled at the nodes and renormalized to unit mass.
template <typename Scalar>
DensityFieldT<Scalar> init_gaussian(const GridSpecT<Scalar>& grid,
                                    Scalar mean_u, Scalar mean_v, Scalar var_u,
                                    Scalar var_v) {
  if (!(var_u > 0) || !(var_v > 0))
    throw GridError("init_gaussian: variances must be > 0");
  if (!grid.contains(mean_u, mean_v))
    throw GridError("init_gaussian: mean outside the grid domain");

  ArrayX<Scalar> gu(grid.n_u), gv(grid.n_v);
  for (Index i = 0; i < grid.n_u; ++i) {
    const Scalar d = grid.u(i) - mean_u;
    gu[i] = std::exp(-d * d / (2 * var_u));
  }
  for (Index j = 0; j < grid.n_v; ++j) {
    const Scalar d = grid.v(j) - mean_v;
    gv[j] = std::exp(-d * d / (2 * var_v));
  }

  DensityFieldT<Scalar> field{grid, ArrayXX<Scalar>(grid.n_u, grid.n_v)};
  field.values = (gu.matrix() * gv.matrix().transpose()).array();
  // absorbing edges start empty
  field.values.row(0).setZero();
  field.values.row(grid.n_u - 1).setZero();
  field.values.col(0).setZero();
  field.values.col(grid.n_v - 1).setZero();
  field.values /= field.values.sum() * grid.cell_area();
  return field;
}

template <typename Scalar>
struct MomentsT {
  Scalar mean_u, mean_v, var_u, var_v;
};
using Moments = MomentsT<double>;

// First and second moments of the density normalized by its surviving mass
// (midpoint quadrature).
template <typename Scalar>
MomentsT<Scalar> moments(const DensityFieldT<Scalar>& field) {
  const ArrayX<Scalar> marg_u = field.values.rowwise().sum();
  const ArrayX<Scalar> marg_v = field.values.colwise().sum();
  const Scalar total = marg_u.sum();
  if (!(total * field.grid.cell_area() > Scalar(1e-12)))
    throw EmptyDensity("moments: total mass below 1e-12");

  ArrayX<Scalar> u_nodes(field.grid.n_u), v_nodes(field.grid.n_v);
  for (Index i = 0; i < field.grid.n_u; ++i) u_nodes[i] = field.grid.u(i);
  for (Index j = 0; j < field.grid.n_v; ++j) v_nodes[j] = field.grid.v(j);

  MomentsT<Scalar> m;
  m.mean_u = (u_nodes * marg_u).sum() / total;
  m.mean_v = (v_nodes * marg_v).sum() / total;
  m.var_u = ((u_nodes - m.mean_u).square() * marg_u).sum() / total;
  m.var_v = ((v_nodes - m.mean_v).square() * marg_v).sum() / total;
  return m;
}

// Fraction of the surviving mass in the half plane u > 0; the u = 0 node
// column contributes half a cell width.
template <typename Scalar>
Scalar supra_fraction(const DensityFieldT<Scalar>& field) {
  const ArrayX<Scalar> marg_u = field.values.rowwise().sum();
  const Scalar total = marg_u.sum();
  if (!(total * field.grid.cell_area() > Scalar(1e-12)))
    throw EmptyDensity("supra_fraction: total mass below 1e-12");
  Scalar pos = 0;
  for (Index i = 0; i < field.grid.n_u; ++i) {
    const Scalar u = field.grid.u(i);
    if (u > Scalar(1e-9))
      pos += marg_u[i];
    else if (u >= Scalar(-1e-9))
      pos += marg_u[i] / 2;
  }
  return pos / total;
}

// Node indices of the density maximum.
template <typename Scalar>
std::pair<Index, Index> mode_cell(const DensityFieldT<Scalar>& field) {
  Index i = 0, j = 0;
  field.values.maxCoeff(&i, &j);
  return {i, j};
}

namespace detail {

// Tridiagonal solve (Thomas). The systems below are M-matrices (positive
// diagonal, non-positive off-diagonals, diagonally dominant by columns), so
// elimination without pivoting is stable and the inverse is non-negative.
template <typename Scalar>
void solve_tridiagonal(const Scalar* sub, const Scalar* diag, const Scalar* sup,
                       Scalar* rhs, Scalar* scratch, Index n) {
  scratch[0] = sup[0] / diag[0];
  rhs[0] = rhs[0] / diag[0];
  for (Index i = 1; i < n; ++i) {
    const Scalar m = diag[i] - sub[i] * scratch[i - 1];
    scratch[i] = sup[i] / m;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / m;
  }
  for (Index i = n - 2; i >= 0; --i) rhs[i] -= scratch[i] * rhs[i + 1];
}

// Bernoulli function x / (e^x - 1), the exponential-fitting weight.
template <typename Scalar>
Scalar bernoulli(Scalar x) {
  if (std::abs(x) < Scalar(1e-5)) return 1 - x / 2 + x * x / 12;
  if (x > Scalar(700)) return Scalar(0);
  if (x < Scalar(-700)) return -x;
  return x / std::expm1(x);
}

}  // namespace detail

// One dt of the Fokker-Planck evolution
//   d rho/dt = -d[Au rho]/du - d[Av rho]/dv + D c^2 d2 rho/du2,
//   Au = c(-v + u - u^3/3 + I1),  Av = u - b v + a,
// by alternating direction splitting: one implicit sweep treats the
// u-direction advection-diffusion row by row, the other treats the
// v-direction advection column by column; the sweep order flips every step.
// The u fluxes are exponentially fitted two-point fluxes (Chang-Cooper
// weights), which reproduce local drift-diffusion equilibria exactly and
// hence add no artificial broadening to quasi-stationary profiles; they
// reduce to first-order upwind as the diffusion vanishes. The v direction
// carries no physical diffusion and uses plain conservative upwind. Both
// sweeps assemble M-matrices, so the density stays non-negative at any dt.
// Boundary nodes are held at zero and the outward flux is accounted in
// leaked_mass. I1 is sampled once per step.
template <typename Scalar>
void fp_step(DensityFieldT<Scalar>& field, const FpStepConfigT<Scalar>& cfg,
             Scalar input) {
  const auto& g = field.grid;
  const auto& p = cfg.params;
  const Scalar dt = cfg.dt;
  if (!(dt > 0)) throw ConfigError("fp_step: dt must be > 0");
  const Scalar nu = p.D * p.c * p.c;  // diffusion along u only

  // face-centered drift pieces that do not change across rows/columns
  ArrayX<Scalar> cu_face(g.n_u - 1), av_base(g.n_v - 1);
  for (Index f = 0; f + 1 < g.n_u; ++f) {
    const Scalar uf = g.u_min + (Scalar(f) + Scalar(0.5)) * g.du;
    cu_face[f] = p.c * (uf - uf * uf * uf / Scalar(3));
  }
  for (Index f = 0; f + 1 < g.n_v; ++f) {
    const Scalar vf = g.v_min + (Scalar(f) + Scalar(0.5)) * g.dv;
    av_base[f] = p.a - p.b * vf;
  }

  ArrayX<Scalar> row_leak = ArrayX<Scalar>::Zero(g.n_v);
  ArrayX<Scalar> col_leak = ArrayX<Scalar>::Zero(g.n_u);

  // Face flux F_f = wm[f] rho_left - wp[f] rho_right with non-negative
  // weights, so the implicit systems stay M-matrices.
  const auto sweep_u = [&]() {
    const Index m = g.n_u - 2;  // interior unknowns per row
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      std::vector<Scalar> sub(m), diag(m), sup(m), rhs(m), scratch(m),
          wm(g.n_u - 1), wp(g.n_u - 1);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
      for (Index j = 1; j < g.n_v - 1; ++j) {
        const Scalar shift = p.c * (input - g.v(j));
        for (Index f = 0; f + 1 < g.n_u; ++f) {
          const Scalar a = cu_face[f] + shift;
          if (nu > 0) {
            const Scalar peclet = a * g.du / nu;
            wm[f] = nu / g.du * detail::bernoulli(-peclet);
            wp[f] = nu / g.du * detail::bernoulli(peclet);
          } else {
            wm[f] = std::max(a, Scalar(0));
            wp[f] = -std::min(a, Scalar(0));
          }
        }
        for (Index i = 1; i <= m; ++i) {
          sub[i - 1] = -dt * wm[i - 1] / g.du;
          diag[i - 1] = 1 + dt * (wp[i - 1] + wm[i]) / g.du;
          sup[i - 1] = -dt * wp[i] / g.du;
          rhs[i - 1] = field.values(i, j);
        }
        detail::solve_tridiagonal(sub.data(), diag.data(), sup.data(),
                                  rhs.data(), scratch.data(), m);
        for (Index i = 1; i <= m; ++i) field.values(i, j) = rhs[i - 1];
        row_leak[j] += dt * g.dv *
                       (wp[0] * field.values(1, j) +
                        wm[g.n_u - 2] * field.values(g.n_u - 2, j));
      }
    }
  };

  // The v direction has no physical diffusion, so the first-order solve is
  // followed by a flux-corrected antidiffusion pass: the scheme's known
  // numerical diffusivity |a| dv/2 + a^2 dt/2 is subtracted back through
  // Zalesak-limited fluxes, which keeps every node inside the local extrema
  // of the low-order solution (hence non-negative) and conserves mass.
  const auto sweep_v = [&]() {
    const Index m = g.n_v - 2;
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      std::vector<Scalar> sub(m), diag(m), sup(m), rhs(m), scratch(m),
          wm(g.n_v - 1), wp(g.n_v - 1), anti(g.n_v - 1), ratio_up(g.n_v),
          ratio_down(g.n_v);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
      for (Index i = 1; i < g.n_u - 1; ++i) {
        const Scalar u = g.u(i);
        for (Index f = 0; f + 1 < g.n_v; ++f) {
          const Scalar a = u + av_base[f];
          wm[f] = std::max(a, Scalar(0));
          wp[f] = -std::min(a, Scalar(0));
        }
        for (Index j = 1; j <= m; ++j) {
          sub[j - 1] = -dt * wm[j - 1] / g.dv;
          diag[j - 1] = 1 + dt * (wp[j - 1] + wm[j]) / g.dv;
          sup[j - 1] = -dt * wp[j] / g.dv;
          rhs[j - 1] = field.values(i, j);
        }
        detail::solve_tridiagonal(sub.data(), diag.data(), sup.data(),
                                  rhs.data(), scratch.data(), m);
        for (Index j = 1; j <= m; ++j) field.values(i, j) = rhs[j - 1];
        col_leak[i] += dt * g.du *
                       (wp[0] * field.values(i, 1) +
                        wm[g.n_v - 2] * field.values(i, g.n_v - 2));

        // antidiffusive fluxes; boundary faces stay zero so the correction
        // never touches the leak bookkeeping
        anti[0] = anti[g.n_v - 2] = 0;
        for (Index f = 1; f + 2 < g.n_v; ++f) {
          const Scalar a = u + av_base[f];
          const Scalar diffusivity =
              std::abs(a) * g.dv / 2 + a * a * dt / 2;
          anti[f] = diffusivity *
                    (field.values(i, f + 1) - field.values(i, f)) / g.dv;
        }
        for (Index j = 1; j <= m; ++j) {
          const Scalar here = field.values(i, j);
          const Scalar below = field.values(i, j - 1);
          const Scalar above = field.values(i, j + 1);
          const Scalar local_max = std::max({below, here, above});
          const Scalar local_min = std::min({below, here, above});
          const Scalar gross_in =
              std::max(anti[j - 1], Scalar(0)) - std::min(anti[j], Scalar(0));
          const Scalar gross_out =
              std::max(anti[j], Scalar(0)) - std::min(anti[j - 1], Scalar(0));
          ratio_up[j] =
              gross_in > 0
                  ? std::min(Scalar(1), (local_max - here) * g.dv / dt / gross_in)
                  : Scalar(0);
          ratio_down[j] =
              gross_out > 0
                  ? std::min(Scalar(1), (here - local_min) * g.dv / dt / gross_out)
                  : Scalar(0);
        }
        for (Index f = 1; f + 2 < g.n_v; ++f) {
          const Scalar limit = anti[f] >= 0
                                   ? std::min(ratio_up[f + 1], ratio_down[f])
                                   : std::min(ratio_up[f], ratio_down[f + 1]);
          anti[f] *= limit;
        }
        for (Index j = 1; j <= m; ++j)
          field.values(i, j) -= dt / g.dv * (anti[j] - anti[j - 1]);
      }
    }
  };

  if (field.steps % 2 == 0) {
    sweep_u();
    sweep_v();
  } else {
    sweep_v();
    sweep_u();
  }

  field.leaked_mass += row_leak.sum() + col_leak.sum();

  // Splitting roundoff may leave values a hair below zero: clip and charge
  // the created mass against the leak account. Anything beyond roundoff
  // scale means the solve went wrong.
  if (!field.values.isFinite().all())
    throw StabilityError("fp_step: non-finite density value");
  const Scalar min_val = field.values.minCoeff();
  if (min_val < Scalar(-1e-12))
    throw StabilityError("fp_step: density below -1e-12");
  if (min_val < 0) {
    const Scalar deficit =
        (field.values < 0).select(field.values, Scalar(0)).sum() *
        g.cell_area();
    field.values = field.values.max(Scalar(0));
    field.leaked_mass += deficit;
  }

  field.time += dt;
  field.steps += 1;
}

// --- density snapshot format -------------------------------------------
//
// Plain text: a key-value header followed by the node values, n_v rows of
// n_u columns each (row-major in v).

inline void write_density(std::ostream& os, const DensityField& field) {
  os << std::setprecision(9);
  os << "fhn-density 1\n";
  os << "u_min " << field.grid.u_min << "\nu_max " << field.grid.u_max
     << "\ndu " << field.grid.du << "\n";
  os << "v_min " << field.grid.v_min << "\nv_max " << field.grid.v_max
     << "\ndv " << field.grid.dv << "\n";
  os << "n_u " << field.grid.n_u << "\nn_v " << field.grid.n_v << "\n";
  os << "time " << field.time << "\n";
  os << "total_mass " << total_mass(field) << "\n";
  os << "leaked_mass " << field.leaked_mass << "\n";
  os << "data\n";
  for (Index j = 0; j < field.grid.n_v; ++j) {
    for (Index i = 0; i < field.grid.n_u; ++i) {
      if (i) os << ' ';
      os << field.values(i, j);
    }
    os << '\n';
  }
}

inline void write_density(const std::filesystem::path& path,
                          const DensityField& field) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_density(os, field);
  if (!os) throw IoError("failed writing " + path.string());
}

inline DensityField read_density(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "fhn-density 1")
    throw IoError("density snapshot: bad magic line");
  double u_min = 0, u_max = 0, du = 0, v_min = 0, v_max = 0, dv = 0;
  double time = 0, leaked = 0;
  long n_u = 0, n_v = 0;
  while (std::getline(is, line)) {
    if (line == "data") break;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "u_min") ls >> u_min;
    else if (key == "u_max") ls >> u_max;
    else if (key == "du") ls >> du;
    else if (key == "v_min") ls >> v_min;
    else if (key == "v_max") ls >> v_max;
    else if (key == "dv") ls >> dv;
    else if (key == "n_u") ls >> n_u;
    else if (key == "n_v") ls >> n_v;
    else if (key == "time") ls >> time;
    else if (key == "total_mass") { double ignored; ls >> ignored; }
    else if (key == "leaked_mass") ls >> leaked;
    else throw IoError("density snapshot: unknown header key " + key);
    if (!ls) throw IoError("density snapshot: bad value for " + key);
  }
  DensityField field{GridSpec::make(u_min, u_max, v_min, v_max, du, dv),
                     ArrayXXd{}};
  if (field.grid.n_u != n_u || field.grid.n_v != n_v)
    throw IoError("density snapshot: node counts disagree with the grid");
  field.time = time;
  field.leaked_mass = leaked;
  field.values.resize(field.grid.n_u, field.grid.n_v);
  for (Index j = 0; j < field.grid.n_v; ++j)
    for (Index i = 0; i < field.grid.n_u; ++i)
      if (!(is >> field.values(i, j)))
        throw IoError("density snapshot: truncated data section");
  return field;
}

inline DensityField read_density(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_density(is);
}

}  // namespace fhn
