#pragma once

// Discretized phase space T^{dim_x} x R^3 (velocity truncated to a cube of
// half-width rv), the Maxwellian mu = exp(-|v|^2), and the field container.
//
// Velocity nodes are cell centers, v_k = -rv + (k + 1/2) dv, symmetric under
// v -> -v and never hitting v = 0.  Quadrature is midpoint throughout:
// weight dv^3 per velocity node, dx = 2 pi / nx per spatial node.
// Fields are stored x-major, v-minor; the velocity block is row-major in
// (k1, k2, k3).

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace landau {

struct PhaseGrid {
  int dim_x = 1;   // spatial dimensionality (velocity is always 3-D)
  int nx = 16;     // points per spatial axis, period 2 pi
  int nv = 24;     // points per velocity axis
  double rv = 5.5; // velocity truncation radius
  double dx = 0.0;
  double dv = 0.0;

  std::vector<double> v1;  // per-axis node coordinates, size nv
  std::vector<double> x1;  // spatial node coordinates in [-pi, pi), size nx

  // Per-velocity-node profiles, size nv^3 (row-major in (k1,k2,k3)).
  std::vector<double> V[3];  // coordinate fields v_1, v_2, v_3
  std::vector<double> vsq;   // |v|^2
  std::vector<double> vabs;  // |v|
  std::vector<double> mu;    // exp(-|v|^2)
  std::vector<double> smu;   // exp(-|v|^2 / 2)
  std::vector<double> w;     // 1 + |v|

  static PhaseGrid make(int nv, double rv, int nx = 16, int dim_x = 1) {
    if (nv < 4) throw std::invalid_argument("grid: nv must be >= 4");
    if (!(rv > 0.0)) throw std::invalid_argument("grid: rv must be > 0");
    if (nx < 2) throw std::invalid_argument("grid: nx must be >= 2");
    if (dim_x < 1 || dim_x > 3)
      throw std::invalid_argument("grid: dim_x must be in {1,2,3}");
    PhaseGrid g;
    g.dim_x = dim_x;
    g.nx = nx;
    g.nv = nv;
    g.rv = rv;
    g.dv = 2.0 * rv / nv;
    g.dx = 2.0 * M_PI / nx;
    g.v1.resize(nv);
    // Algebraically -rv + (k + 1/2) dv, written so that v1[nv-1-k] is the
    // bit-exact negation of v1[k]; evenness checks rely on that.
    for (int k = 0; k < nv; ++k) g.v1[k] = rv * (2 * k + 1 - nv) / nv;
    g.x1.resize(nx);
    for (int k = 0; k < nx; ++k) g.x1[k] = -M_PI + k * g.dx;
    const std::size_t n3 = g.nv3();
    for (auto* a : {&g.V[0], &g.V[1], &g.V[2], &g.vsq, &g.vabs, &g.mu, &g.smu,
                    &g.w})
      a->resize(n3);
    std::size_t idx = 0;
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b)
        for (int c = 0; c < nv; ++c, ++idx) {
          double va = g.v1[a], vb = g.v1[b], vc = g.v1[c];
          double s = va * va + vb * vb + vc * vc;
          g.V[0][idx] = va;
          g.V[1][idx] = vb;
          g.V[2][idx] = vc;
          g.vsq[idx] = s;
          g.vabs[idx] = std::sqrt(s);
          g.mu[idx] = std::exp(-s);
          g.smu[idx] = std::exp(-0.5 * s);
          g.w[idx] = 1.0 + g.vabs[idx];
        }
    return g;
  }

  std::size_t nv3() const {
    return static_cast<std::size_t>(nv) * nv * nv;
  }
  // Number of spatial nodes (nx^dim_x).
  std::size_t nxt() const {
    std::size_t n = 1;
    for (int d = 0; d < dim_x; ++d) n *= static_cast<std::size_t>(nx);
    return n;
  }
  std::size_t size() const { return nxt() * nv3(); }

  std::size_t vindex(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * nv + b) * nv + c;
  }

  // Quadrature weights.
  double dv3() const { return dv * dv * dv; }
  double x_measure() const {  // product of dx over spatial axes
    double m = 1.0;
    for (int d = 0; d < dim_x; ++d) m *= dx;
    return m;
  }

  bool same_as(const PhaseGrid& o) const {
    return dim_x == o.dim_x && nx == o.nx && nv == o.nv && rv == o.rv;
  }
};

// mu(v) = exp(-|v|^2) sampled at all velocity nodes.
inline std::vector<double> maxwellian(const PhaseGrid& g) { return g.mu; }

// w^theta(v) = (1 + |v|)^theta.
inline std::vector<double> weight(const PhaseGrid& g, double theta) {
  std::vector<double> out(g.nv3());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::pow(g.w[i], theta);
  return out;
}

// Perturbation field on the full phase-space grid, x-major v-minor.
struct Field {
  const PhaseGrid* grid = nullptr;
  std::vector<double> data;

  Field() = default;
  explicit Field(const PhaseGrid& g) : grid(&g), data(g.size(), 0.0) {}

  double* x_block(std::size_t ix) { return data.data() + ix * grid->nv3(); }
  const double* x_block(std::size_t ix) const {
    return data.data() + ix * grid->nv3();
  }

  bool finite() const {
    for (double x : data)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

// Samples fn(x, v) at every node.  x is passed as a 3-vector whose unused
// trailing components (dim_x < 3) are zero.
inline Field lift(const PhaseGrid& g,
                  const std::function<double(const double*, const double*)>& fn) {
  Field f(g);
  const std::size_t n3 = g.nv3();
  const std::size_t nxt = g.nxt();
  for (std::size_t ix = 0; ix < nxt; ++ix) {
    double xs[3] = {0.0, 0.0, 0.0};
    std::size_t rem = ix;
    for (int d = g.dim_x - 1; d >= 0; --d) {
      xs[d] = g.x1[rem % g.nx];
      rem /= g.nx;
    }
    double* blk = f.x_block(ix);
    for (std::size_t iv = 0; iv < n3; ++iv) {
      double vs[3] = {g.V[0][iv], g.V[1][iv], g.V[2][iv]};
      blk[iv] = fn(xs, vs);
    }
  }
  return f;
}

}  // namespace landau
