#pragma once

// Weighted norms, the sigma inner product, sup norms, and the energy
// functional.  All integrals are midpoint quadrature: dv^3 per velocity node
// and dx^{dim_x} per spatial node.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "landau/deriv.hpp"
#include "landau/grid.hpp"
#include "landau/kernel.hpp"

namespace landau {

// Compensated accumulator: keeps the norm reductions accurate to a few ulp
// independent of node count, so absolute homogeneity N(a f) = |a| N(f) holds
// at the ulp level instead of drifting with sqrt(n) rounding noise.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

// w^{2 theta} over one velocity block.
inline std::vector<double> weight_sq_profile(const PhaseGrid& g,
                                             double theta) {
  std::vector<double> w2(g.nv3());
  for (std::size_t i = 0; i < w2.size(); ++i)
    w2[i] = std::pow(g.w[i], 2.0 * theta);
  return w2;
}

inline double norm_l2_weighted(const Field& f, double theta) {
  const PhaseGrid& g = *f.grid;
  const auto w2 = weight_sq_profile(g, theta);
  const std::size_t n3 = g.nv3();
  KahanSum acc;
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    const double* blk = f.x_block(ix);
    for (std::size_t i = 0; i < n3; ++i) acc.add(w2[i] * blk[i] * blk[i]);
  }
  return std::sqrt(acc.value() * g.dv3() * g.x_measure());
}

// Integral of w^{2 theta} [sigma^{ij} d_i f d_j h + sigma^{ij} v_i v_j f h]
// with sigma = sigma_mu and one-sided velocity derivatives.  The i < j terms
// are grouped so the expression is exactly symmetric in (f, h).
inline double inner_sigma(const Field& f, const Field& h, double theta,
                          const SigmaBlock& sigma_mu) {
  const PhaseGrid& g = *f.grid;
  if (!h.grid || !h.grid->same_as(g))
    throw std::invalid_argument("inner_sigma: field grids differ");
  const auto w2 = weight_sq_profile(g, theta);
  const std::size_t n3 = g.nv3();
  std::vector<double> df[3], dh[3];
  for (int i = 0; i < 3; ++i) {
    df[i].resize(n3);
    dh[i].resize(n3);
  }
  KahanSum acc;
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    const double* fb = f.x_block(ix);
    const double* hb = h.x_block(ix);
    for (int i = 0; i < 3; ++i) {
      d_center(g, fb, i, Closure::OneSided, df[i].data());
      d_center(g, hb, i, Closure::OneSided, dh[i].data());
    }
    for (std::size_t m = 0; m < n3; ++m) {
      double q = 0.0;
      for (int i = 0; i < 3; ++i)
        q += sigma_mu(m, i, i) * (df[i][m] * dh[i][m] +
                                  g.V[i][m] * g.V[i][m] * fb[m] * hb[m]);
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
          q += sigma_mu(m, i, j) *
               ((df[i][m] * dh[j][m] + df[j][m] * dh[i][m]) +
                2.0 * g.V[i][m] * g.V[j][m] * fb[m] * hb[m]);
      acc.add(w2[m] * q);
    }
  }
  return acc.value() * g.dv3() * g.x_measure();
}

inline double norm_sigma(const Field& f, double theta,
                         const SigmaBlock& sigma_mu) {
  return std::sqrt(std::max(0.0, inner_sigma(f, f, theta, sigma_mu)));
}

inline double norm_sup_weighted(const Field& f, double theta) {
  const PhaseGrid& g = *f.grid;
  std::vector<double> wt(g.nv3());
  for (std::size_t i = 0; i < wt.size(); ++i)
    wt[i] = std::pow(g.w[i], theta);
  double mx = 0.0;
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    const double* blk = f.x_block(ix);
    for (std::size_t i = 0; i < g.nv3(); ++i)
      mx = std::max(mx, wt[i] * std::abs(blk[i]));
  }
  return mx;
}

// Energy from precomputed samples: trapezoid of the sigma-norm-squared
// history plus half the terminal squared L2 norm.
inline double energy_from_samples(const std::vector<double>& t,
                                  const std::vector<double>& sigma_sq,
                                  double terminal_l2_sq) {
  if (t.size() != sigma_sq.size())
    throw std::invalid_argument("energy: sample shapes differ");
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    if (!(t[k + 1] > t[k]))
      throw std::invalid_argument("energy: times must increase");
    integral += 0.5 * (t[k + 1] - t[k]) * (sigma_sq[k] + sigma_sq[k + 1]);
  }
  return 0.5 * terminal_l2_sq + integral;
}

inline double energy(const std::vector<double>& t,
                     const std::vector<const Field*>& fs, double theta,
                     const SigmaBlock& sigma_mu) {
  if (t.size() != fs.size() || t.empty())
    throw std::invalid_argument("energy: empty or mismatched trajectory");
  std::vector<double> ss(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double s = norm_sigma(*fs[k], theta, sigma_mu);
    ss[k] = s * s;
  }
  const double l2 = norm_l2_weighted(*fs.back(), theta);
  return energy_from_samples(t, ss, l2 * l2);
}

// Snapshot of the weighted norms of one field plus the running energy
// integral (trapezoid of the sigma-norm history owned by the caller).
struct NormReport {
  double l2_theta = 0.0;
  double sigma_theta = 0.0;
  double sup_theta = 0.0;
  double energy_theta = 0.0;
  double theta = 0.0;
};

inline NormReport make_norm_report(const Field& f, double theta,
                                   const SigmaBlock& sigma_mu,
                                   double energy_running) {
  NormReport r;
  r.theta = theta;
  r.l2_theta = norm_l2_weighted(f, theta);
  r.sigma_theta = norm_sigma(f, theta, sigma_mu);
  r.sup_theta = norm_sup_weighted(f, theta);
  r.energy_theta = energy_running;
  return r;
}

}  // namespace landau
