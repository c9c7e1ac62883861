#pragma once

// Second-order velocity derivatives on a single nv^3 block (row-major in
// (k1,k2,k3)), plus the Gaussian-factored variants used by the collision
// operators.
//
// Two boundary closures:
//   OneSided  — second-order one-sided rows at k = 0 and k = nv-1
//               (exact on quadratics, used wherever a plain derivative of a
//               smooth profile is needed),
//   GhostZero — the function is extended by zero outside the box
//               (used for flux divergences; the resulting difference matrix
//               is exactly antisymmetric, which the implicit solver and the
//               energy bookkeeping rely on).
//
// The factored forms evaluate sqrt(mu) * d/dv_j (f / sqrt(mu)) and
// (1/sqrt(mu)) * d/dv_i (sqrt(mu) * Z_i) without ever forming f / sqrt(mu):
// each stencil coefficient picks up a ratio of Gaussians,
// exp(+-v_j h + h^2/2) etc., bounded by about exp(rv*dv) on the grid, so the
// evaluation stays well-scaled even where mu underflows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "landau/grid.hpp"

namespace landau {

enum class Closure { OneSided, GhostZero };

namespace detail {

// Calls fn(base, stride) once per grid line along `axis` of an nv^3 block.
template <class LineFn>
inline void for_each_vline(int nv, int axis, LineFn&& fn) {
  const std::ptrdiff_t str[3] = {static_cast<std::ptrdiff_t>(nv) * nv, nv, 1};
  const int o1 = (axis == 0) ? 1 : 0;
  const int o2 = (axis == 2) ? 1 : 2;
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b)
      fn(a * str[o1] + b * str[o2], str[axis]);
}

}  // namespace detail

// out = d f / d v_axis, centered in the interior.
inline void d_center(const PhaseGrid& g, const double* f, int axis,
                     Closure cl, double* out) {
  const int nv = g.nv;
  const double i2h = 1.0 / (2.0 * g.dv);
  detail::for_each_vline(nv, axis, [&](std::ptrdiff_t base, std::ptrdiff_t s) {
    const double* fl = f + base;
    double* ol = out + base;
    for (int k = 1; k < nv - 1; ++k)
      ol[k * s] = (fl[(k + 1) * s] - fl[(k - 1) * s]) * i2h;
    if (cl == Closure::OneSided) {
      ol[0] = (-3.0 * fl[0] + 4.0 * fl[s] - fl[2 * s]) * i2h;
      ol[(nv - 1) * s] = (3.0 * fl[(nv - 1) * s] - 4.0 * fl[(nv - 2) * s] +
                          fl[(nv - 3) * s]) * i2h;
    } else {
      ol[0] = fl[s] * i2h;
      ol[(nv - 1) * s] = -fl[(nv - 2) * s] * i2h;
    }
  });
}

// out = sqrt(mu) * d/dv_axis (f / sqrt(mu)), one-sided boundary rows.
// Interior:  [f(v+h e) e^{+v h + h^2/2} - f(v-h e) e^{-v h + h^2/2}] / (2h),
// where v is the coordinate along `axis`.  The boundary-row ratios
// e^{v0 h + h^2/2} etc. point inward (v0 and the offset have opposite signs)
// and are all <= 1.
inline void d_gauss_factored(const PhaseGrid& g, const double* f, int axis,
                             double* out) {
  const int nv = g.nv;
  const double h = g.dv;
  const double i2h = 1.0 / (2.0 * h);
  std::vector<double> rp(nv), rm(nv);
  for (int k = 0; k < nv; ++k) {
    rp[k] = std::exp(g.v1[k] * h + 0.5 * h * h);
    rm[k] = std::exp(-g.v1[k] * h + 0.5 * h * h);
  }
  const double r2lo = std::exp(2.0 * g.v1[0] * h + 2.0 * h * h);
  const double r2hi = std::exp(-2.0 * g.v1[nv - 1] * h + 2.0 * h * h);
  detail::for_each_vline(nv, axis, [&](std::ptrdiff_t base, std::ptrdiff_t s) {
    const double* fl = f + base;
    double* ol = out + base;
    for (int k = 1; k < nv - 1; ++k)
      ol[k * s] = (fl[(k + 1) * s] * rp[k] - fl[(k - 1) * s] * rm[k]) * i2h;
    ol[0] = (-3.0 * fl[0] + 4.0 * fl[s] * rp[0] - fl[2 * s] * r2lo) * i2h;
    ol[(nv - 1) * s] =
        (3.0 * fl[(nv - 1) * s] - 4.0 * fl[(nv - 2) * s] * rm[nv - 1] +
         fl[(nv - 3) * s] * r2hi) * i2h;
  });
}

// out = sign * (1/sqrt(mu)) * sum_i d/dv_i (sqrt(mu) * Z_i), ghost-zero.
// Per axis:  [Z(v+h e) e^{-v h - h^2/2} - Z(v-h e) e^{+v h - h^2/2}] / (2h).
// This is the flux divergence shared by the diffusion and the compact
// collision channel; `out` is overwritten.
inline void div_gauss_weighted(const PhaseGrid& g, const double* const Z[3],
                               double sign, double* out) {
  const int nv = g.nv;
  const double h = g.dv;
  const double c = sign / (2.0 * h);
  std::vector<double> tp(nv), tm(nv);
  for (int k = 0; k < nv; ++k) {
    tp[k] = std::exp(-g.v1[k] * h - 0.5 * h * h);
    tm[k] = std::exp(g.v1[k] * h - 0.5 * h * h);
  }
  std::fill(out, out + g.nv3(), 0.0);
  for (int axis = 0; axis < 3; ++axis) {
    const double* Zi = Z[axis];
    detail::for_each_vline(nv, axis,
                           [&](std::ptrdiff_t base, std::ptrdiff_t s) {
      const double* zl = Zi + base;
      double* ol = out + base;
      for (int k = 1; k < nv - 1; ++k)
        ol[k * s] += (zl[(k + 1) * s] * tp[k] - zl[(k - 1) * s] * tm[k]) * c;
      ol[0] += zl[s] * tp[0] * c;
      ol[(nv - 1) * s] += -zl[(nv - 2) * s] * tm[nv - 1] * c;
    });
  }
}

}  // namespace landau
