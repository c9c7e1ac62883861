#pragma once

// The vector projection P_v and the macroscopic projection onto
// span{sqrt(mu), v_i sqrt(mu), (|v|^2 - 3)/2 sqrt(mu)} per x-node.
//
// The projection is the exact discrete orthogonal projection under midpoint
// quadrature: the 5x5 Gram matrix of the basis is assembled on the actual
// grid and solved, so idempotence and orthogonality hold to round-off by
// construction rather than relying on continuum normalizers.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "landau/grid.hpp"

namespace landau {

// (g . vhat) vhat.
inline Eigen::Vector3d project_Pv(const Eigen::Vector3d& v,
                                  const Eigen::Vector3d& g) {
  const double n2 = v.squaredNorm();
  if (n2 == 0.0)
    throw std::invalid_argument("project_Pv: direction must be nonzero");
  return v * (g.dot(v) / n2);
}

struct MacroCoefficients {
  std::vector<double> a;   // per x-node
  std::vector<double> b0, b1, b2;
  std::vector<double> c;
};

class Projector {
 public:
  explicit Projector(const PhaseGrid& g) : grid_(&g) {
    const std::size_t n3 = g.nv3();
    for (int k = 0; k < 5; ++k) basis_[k].resize(n3);
    for (std::size_t m = 0; m < n3; ++m) {
      const double s = g.smu[m];
      basis_[0][m] = s;
      basis_[1][m] = g.V[0][m] * s;
      basis_[2][m] = g.V[1][m] * s;
      basis_[3][m] = g.V[2][m] * s;
      basis_[4][m] = 0.5 * (g.vsq[m] - 3.0) * s;
    }
    Eigen::Matrix<double, 5, 5> G;
    for (int k = 0; k < 5; ++k)
      for (int l = k; l < 5; ++l) {
        double s = 0.0;
        for (std::size_t m = 0; m < n3; ++m) s += basis_[k][m] * basis_[l][m];
        G(k, l) = G(l, k) = s * g.dv3();
      }
    gram_ = G;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(G);
    if (es.eigenvalues()(0) <= 0.0)
      throw std::runtime_error("projection: Gram matrix not positive definite");
    cond_ = es.eigenvalues()(4) / es.eigenvalues()(0);
    ldlt_.compute(G);
  }

  const PhaseGrid& grid() const { return *grid_; }
  double gram_condition() const { return cond_; }
  const Eigen::Matrix<double, 5, 5>& gram() const { return gram_; }
  const std::vector<double>& basis(int k) const { return basis_[k]; }

  // Projection coefficients (a, b, c) of a single velocity block.
  Eigen::Matrix<double, 5, 1> coeffs_block(const double* f) const {
    const PhaseGrid& g = *grid_;
    Eigen::Matrix<double, 5, 1> m;
    for (int k = 0; k < 5; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.nv3(); ++i) s += basis_[k][i] * f[i];
      m(k) = s * g.dv3();
    }
    return ldlt_.solve(m);
  }

  // out <- projection of the block (overwritten; out may not alias f).
  void apply_P_block(const double* f, double* out) const {
    const auto coef = coeffs_block(f);
    const std::size_t n3 = grid_->nv3();
    for (std::size_t i = 0; i < n3; ++i) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += coef(k) * basis_[k][i];
      out[i] = s;
    }
  }

  MacroCoefficients macro_coefficients(const Field& f) const {
    require_same_grid(f);
    const std::size_t nxt = grid_->nxt();
    MacroCoefficients mc;
    mc.a.resize(nxt);
    mc.b0.resize(nxt);
    mc.b1.resize(nxt);
    mc.b2.resize(nxt);
    mc.c.resize(nxt);
    for (std::size_t ix = 0; ix < nxt; ++ix) {
      const auto coef = coeffs_block(f.x_block(ix));
      mc.a[ix] = coef(0);
      mc.b0[ix] = coef(1);
      mc.b1[ix] = coef(2);
      mc.b2[ix] = coef(3);
      mc.c[ix] = coef(4);
    }
    return mc;
  }

  Field apply_P(const Field& f) const {
    require_same_grid(f);
    Field out(*grid_);
    for (std::size_t ix = 0; ix < grid_->nxt(); ++ix)
      apply_P_block(f.x_block(ix), out.x_block(ix));
    return out;
  }

  Field apply_IminusP(const Field& f) const {
    Field out = apply_P(f);
    for (std::size_t i = 0; i < f.data.size(); ++i)
      out.data[i] = f.data[i] - out.data[i];
    return out;
  }

 private:
  void require_same_grid(const Field& f) const {
    if (!f.grid || !f.grid->same_as(*grid_))
      throw std::invalid_argument("projection: field grid mismatch");
  }

  const PhaseGrid* grid_;
  std::vector<double> basis_[5];
  Eigen::Matrix<double, 5, 5> gram_;
  Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt_;
  double cond_ = 0.0;
};

}  // namespace landau
