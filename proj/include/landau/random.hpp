#pragma once

// Deterministic random fields.  All randomness in the project flows through
// std::mt19937 (whose integer stream is pinned by the standard) and the
// explicit transforms below, so a (config, seed) pair reproduces bit-for-bit
// on any conforming platform — std::normal_distribution is deliberately
// avoided because its algorithm is implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "landau/grid.hpp"

namespace landau {

// Uniform in (0,1), 53-bit.
inline double u01(std::mt19937& rng) {
  const std::uint64_t hi = rng() >> 5;   // 27 bits
  const std::uint64_t lo = rng() >> 6;   // 26 bits
  double x = (hi * 67108864.0 + lo) * (1.0 / 9007199254740992.0);
  return x > 0.0 ? x : 5e-324;
}

// Standard normal via Box-Muller.
inline double randn(std::mt19937& rng) {
  const double u1 = u01(rng);
  const double u2 = u01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Smooth band-limited velocity profile: random cosine/sine modes up to
// kmax ~ nv * kmax_frac per axis, enveloped by exp(-|v|^2/4) and normalized
// to unit sup norm.  Uses only the low quarter of the spectrum by default so
// refinement studies see the same resolved field.
inline std::vector<double> random_band_profile(const PhaseGrid& g,
                                               unsigned seed,
                                               double kmax_frac = 0.25) {
  std::mt19937 rng(seed);
  const int kmax = std::max(2, static_cast<int>(g.nv * kmax_frac));
  const std::size_t n3 = g.nv3();
  std::vector<double> out(n3, 0.0);

  const double span = g.v1[g.nv - 1] - g.v1[0];
  std::vector<double> xi(g.nv);
  for (int k = 0; k < g.nv; ++k)
    xi[k] = (g.v1[k] - g.v1[0]) / span * 2.0 * M_PI;

  for (int a = 0; a < kmax; ++a)
    for (int b = 0; b < kmax; ++b)
      for (int c = 0; c < kmax; ++c) {
        const double ca = randn(rng);
        const double cb = randn(rng);
        std::size_t idx = 0;
        for (int i = 0; i < g.nv; ++i)
          for (int j = 0; j < g.nv; ++j)
            for (int k = 0; k < g.nv; ++k, ++idx) {
              const double ph = a * xi[i] + b * xi[j] + c * xi[k];
              out[idx] += ca * std::cos(ph) + cb * std::sin(ph);
            }
      }

  double mx = 0.0;
  for (std::size_t i = 0; i < n3; ++i) {
    out[i] *= std::exp(-0.25 * g.vsq[i]);
    mx = std::max(mx, std::abs(out[i]));
  }
  if (mx > 0.0)
    for (auto& x : out) x /= mx;
  return out;
}

}  // namespace landau
