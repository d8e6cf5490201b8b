#pragma once

#include <cmath>

#include "fhn/errors.hpp"
#include "fhn/types.hpp"

namespace fhn {

// Rectangular node-centered (u,v) grid. Nodes sit at u_min + i*du,
// v_min + j*dv; each node owns a du x dv cell for quadrature and binning.
template <typename Scalar = double>
struct GridSpecT {
  Scalar u_min, u_max, v_min, v_max;
  Scalar du, dv;
  Index n_u = 0, n_v = 0;

  static GridSpecT make(Scalar u_min, Scalar u_max, Scalar v_min, Scalar v_max,
                        Scalar du, Scalar dv) {
    if (!(u_max > u_min) || !(v_max > v_min) || !(du > 0) || !(dv > 0))
      throw GridError("grid bounds/steps out of order");
    const Scalar su = (u_max - u_min) / du;
    const Scalar sv = (v_max - v_min) / dv;
    if (std::abs(su - std::round(su)) > 1e-9 ||
        std::abs(sv - std::round(sv)) > 1e-9)
      throw GridError("grid span is not an integer number of cells");
    GridSpecT g{u_min, u_max, v_min, v_max, du, dv};
    g.n_u = static_cast<Index>(std::llround(su)) + 1;
    g.n_v = static_cast<Index>(std::llround(sv)) + 1;
    return g;
  }

  // Domain used throughout: absorbing box u in [-4.5, 4.5], v in
  // [-2.34, 2.34] at du=0.03, dv=0.013 (301 x 361 nodes).
  static GridSpecT make_default() {
    return make(Scalar(-4.5), Scalar(4.5), Scalar(-2.34), Scalar(2.34),
                Scalar(0.03), Scalar(0.013));
  }

  Scalar u(Index i) const { return u_min + Scalar(i) * du; }
  Scalar v(Index j) const { return v_min + Scalar(j) * dv; }
  Scalar cell_area() const { return du * dv; }

  bool contains(Scalar uq, Scalar vq) const {
    return uq >= u_min && uq <= u_max && vq >= v_min && vq <= v_max;
  }

  // Node-centered bin: half-open cell [node - d/2, node + d/2).
  Index u_bin(Scalar uq) const {
    return static_cast<Index>(std::floor((uq - u_min) / du + Scalar(0.5)));
  }
  Index v_bin(Scalar vq) const {
    return static_cast<Index>(std::floor((vq - v_min) / dv + Scalar(0.5)));
  }

  friend bool operator==(const GridSpecT&, const GridSpecT&) = default;
};
using GridSpec = GridSpecT<double>;

}  // namespace fhn
