#pragma once

#include <cmath>
#include <vector>

#include "fhn/errors.hpp"

namespace fhn {

// FitzHugh-Nagumo constants plus the noise intensity D. Defaults are the
// parameter set used throughout: c=10, a=0.7, b=0.8.
template <typename Scalar = double>
struct FhnParamsT {
  Scalar a = Scalar(0.7);
  Scalar b = Scalar(0.8);
  Scalar c = Scalar(10);
  Scalar D = Scalar(0);
};
using FhnParams = FhnParamsT<double>;

template <typename Scalar>
void validate(const FhnParamsT<Scalar>& p) {
  if (!(p.b > Scalar(0)) || !(p.c > Scalar(0)))
    throw ConfigError("model parameters require b > 0 and c > 0");
  if (!(p.D >= Scalar(0))) throw ConfigError("noise intensity D must be >= 0");
}

// Fast membrane voltage u, slow recovery variable v.
template <typename Scalar = double>
struct NeuronStateT {
  Scalar u = Scalar(0);
  Scalar v = Scalar(0);
};
using NeuronState = NeuronStateT<double>;

template <typename Scalar>
struct FlowT {
  Scalar du_dt;
  Scalar dv_dt;
};
using Flow = FlowT<double>;

// Deterministic part of the vector field; noise never enters here.
//   du/dt = c (-v + u - u^3/3 + I1)
//   dv/dt = u - b v + a
template <typename Scalar>
FlowT<Scalar> drift(const FhnParamsT<Scalar>& p, const NeuronStateT<Scalar>& s,
                    Scalar input) {
  const Scalar cubic = s.u - s.u * s.u * s.u / Scalar(3);
  return {p.c * (-s.v + cubic + input), s.u - p.b * s.v + p.a};
}

namespace detail {

// u-nullcline minus v-nullcline at fixed input: root <=> fixed point.
template <typename Scalar>
Scalar nullcline_gap(const FhnParamsT<Scalar>& p, Scalar input, Scalar u) {
  return u - u * u * u / Scalar(3) + input - (u + p.a) / p.b;
}

template <typename Scalar>
Scalar bisect_nullcline_gap(const FhnParamsT<Scalar>& p, Scalar input,
                            Scalar lo, Scalar hi, int max_iter) {
  Scalar flo = nullcline_gap(p, input, lo);
  for (int i = 0; i < max_iter; ++i) {
    const Scalar mid = (lo + hi) / Scalar(2);
    const Scalar fmid = nullcline_gap(p, input, mid);
    if (fmid == Scalar(0)) return mid;
    if ((flo > Scalar(0)) == (fmid > Scalar(0))) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
    if (hi - lo < Scalar(1e-15) * std::max(Scalar(1), std::abs(mid))) break;
  }
  return (lo + hi) / Scalar(2);
}

}  // namespace detail

// Intersection of the two nullclines with the most negative u when several
// real roots exist. Bracketed bisection refined by a few Newton steps.
template <typename Scalar>
NeuronStateT<Scalar> rest_state(const FhnParamsT<Scalar>& p, Scalar input,
                                int max_iter = 200) {
  using detail::nullcline_gap;

  // gap -> +inf as u -> -inf and -> -inf as u -> +inf, so a sign change
  // always exists; grow the bracket until it is captured.
  Scalar span = Scalar(4);
  int budget = max_iter;
  while (!(nullcline_gap(p, input, -span) > Scalar(0) &&
           nullcline_gap(p, input, span) < Scalar(0))) {
    span *= Scalar(2);
    if (--budget == 0) throw NoConvergence("rest_state: no bracket found");
  }

  Scalar lo = -span;
  Scalar hi = span;
  // gap' = (1 - 1/b) - u^2. For b > 1 the gap is non-monotone; the most
  // negative root then sits on the left decreasing branch if that branch
  // crosses zero, otherwise on the right one.
  if (p.b > Scalar(1)) {
    const Scalar s = std::sqrt(Scalar(1) - Scalar(1) / p.b);
    if (nullcline_gap(p, input, -s) <= Scalar(0))
      hi = -s;
    else
      lo = s;
  }

  Scalar u = detail::bisect_nullcline_gap(p, input, lo, hi, max_iter);
  for (int i = 0; i < 8; ++i) {
    const Scalar f = nullcline_gap(p, input, u);
    const Scalar fp = Scalar(1) - u * u - Scalar(1) / p.b;
    if (fp == Scalar(0)) break;
    u -= f / fp;
  }
  if (std::abs(nullcline_gap(p, input, u)) > Scalar(1e-10))
    throw NoConvergence("rest_state: residual above 1e-10");
  return {u, (u + p.a) / p.b};
}

// One classical RK4 step of the deterministic system; input_at(t) supplies
// I1. Higher-order than the stochastic integrator, so it doubles as an
// independent reference in tests.
template <typename Scalar, typename DriveFn>
NeuronStateT<Scalar> rk4_step(const FhnParamsT<Scalar>& p,
                              const NeuronStateT<Scalar>& s, DriveFn&& input_at,
                              Scalar t, Scalar dt) {
  const auto k1 = drift(p, s, input_at(t));
  const NeuronStateT<Scalar> s2{s.u + dt / 2 * k1.du_dt, s.v + dt / 2 * k1.dv_dt};
  const auto k2 = drift(p, s2, input_at(t + dt / 2));
  const NeuronStateT<Scalar> s3{s.u + dt / 2 * k2.du_dt, s.v + dt / 2 * k2.dv_dt};
  const auto k3 = drift(p, s3, input_at(t + dt / 2));
  const NeuronStateT<Scalar> s4{s.u + dt * k3.du_dt, s.v + dt * k3.dv_dt};
  const auto k4 = drift(p, s4, input_at(t + dt));
  return {s.u + dt / 6 * (k1.du_dt + 2 * k2.du_dt + 2 * k3.du_dt + k4.du_dt),
          s.v + dt / 6 * (k1.dv_dt + 2 * k2.dv_dt + 2 * k3.dv_dt + k4.dv_dt)};
}

// Dense RK4 trajectory including the initial state; n_steps = round(t_end/dt).
template <typename Scalar, typename DriveFn>
std::vector<NeuronStateT<Scalar>> rk4_trajectory(const FhnParamsT<Scalar>& p,
                                                 NeuronStateT<Scalar> state,
                                                 DriveFn&& input_at,
                                                 Scalar t_end, Scalar dt) {
  const auto n_steps = static_cast<long>(std::floor(t_end / dt + Scalar(1e-9)));
  std::vector<NeuronStateT<Scalar>> out;
  out.reserve(static_cast<std::size_t>(n_steps) + 1);
  out.push_back(state);
  for (long k = 0; k < n_steps; ++k) {
    state = rk4_step(p, state, input_at, Scalar(k) * dt, dt);
    out.push_back(state);
  }
  return out;
}

enum class Response { Rest, Oscillatory };

// Deterministic response to a constant input of the given amplitude, started
// from the unforced rest state nudged by +0.01 in u. Oscillatory means u
// crosses zero upward at least twice in the second half of the horizon, which
// ignores a single excitable transient spike.
template <typename Scalar>
Response classify_response(const FhnParamsT<Scalar>& p, Scalar amplitude,
                           Scalar horizon = Scalar(100),
                           Scalar dt = Scalar(0.001)) {
  NeuronStateT<Scalar> s = rest_state(p, Scalar(0));
  s.u += Scalar(0.01);
  const auto input_at = [amplitude](Scalar) { return amplitude; };
  const auto n_steps = static_cast<long>(std::floor(horizon / dt + Scalar(1e-9)));
  int upward = 0;
  for (long k = 0; k < n_steps; ++k) {
    const Scalar u_prev = s.u;
    s = rk4_step(p, s, input_at, Scalar(k) * dt, dt);
    if (Scalar(k + 1) * dt >= horizon / 2 && u_prev < Scalar(0) &&
        s.u >= Scalar(0)) {
      if (++upward >= 2) return Response::Oscillatory;
    }
  }
  return Response::Rest;
}

}  // namespace fhn
