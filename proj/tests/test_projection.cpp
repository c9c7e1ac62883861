#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "landau/projection.hpp"
#include "landau/random.hpp"

using landau::Field;
using landau::PhaseGrid;
using landau::Projector;

namespace {

Field random_field(const PhaseGrid& g, unsigned seed) {
  Field f(g);
  std::mt19937 rng(seed);
  for (auto& x : f.data) x = 2.0 * landau::u01(rng) - 1.0;
  // taper so the field lives where the basis does
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    double* blk = f.x_block(ix);
    for (std::size_t i = 0; i < g.nv3(); ++i)
      blk[i] *= std::exp(-0.25 * g.vsq[i]);
  }
  return f;
}

double l2(const Field& f) {
  double s = 0.0;
  for (double x : f.data) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST(Projection, ProjectPvExamples) {
  const Eigen::Vector3d v(1.0, -2.0, 0.5);
  const Eigen::Vector3d gpar = 3.0 * v;
  EXPECT_LT((landau::project_Pv(v, gpar) - gpar).norm(), 1e-14 * gpar.norm());

  const Eigen::Vector3d gperp(2.0, 1.0, 0.0);  // v . gperp = 0
  ASSERT_DOUBLE_EQ(v.dot(gperp), 0.0);
  EXPECT_LT(landau::project_Pv(v, gperp).norm(), 1e-14);

  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Vector3d w, g;
    for (int i = 0; i < 3; ++i) {
      w(i) = 2.0 * landau::u01(rng) - 1.0;
      g(i) = 2.0 * landau::u01(rng) - 1.0;
    }
    const Eigen::Vector3d once = landau::project_Pv(w, g);
    const Eigen::Vector3d twice = landau::project_Pv(w, once);
    EXPECT_LT((twice - once).norm(), 4e-16 * (1.0 + once.norm()));
  }

  EXPECT_THROW(landau::project_Pv(Eigen::Vector3d::Zero(), gpar),
               std::invalid_argument);
}

TEST(Projection, GramIsSpdAndWellConditioned) {
  auto g = PhaseGrid::make(24, 5.5, 4, 1);
  Projector pr(g);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(pr.gram());
  EXPECT_GT(es.eigenvalues()(0), 0.0);
  std::printf("[gram] condition number %.3f\n", pr.gram_condition());
  EXPECT_LT(pr.gram_condition(), 10.0);
  // The only basis coupling is between the constant and the |v|^2 entries:
  // sum (|v|^2-3)/2 e^{-|v|^2} dv^3 = (3/2 - 3)/2 * pi^{3/2}.  The Gram solve
  // orthogonalizes it; the entry itself must match the continuum value.
  const double g04 = -0.75 * std::pow(M_PI, 1.5);
  EXPECT_NEAR(pr.gram()(0, 4), g04, 1e-9);
  const double g11 = 0.5 * std::pow(M_PI, 1.5);  // sum v_0^2 e^{-|v|^2}
  EXPECT_NEAR(pr.gram()(1, 1), g11, 1e-9);
}

TEST(Projection, SqrtMuHasUnitFirstCoefficient) {
  auto g = PhaseGrid::make(16, 5.5, 8, 1);
  Projector pr(g);
  auto f = landau::lift(g, [](const double*, const double* v) {
    return std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
  });
  auto mc = pr.macro_coefficients(f);
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    EXPECT_NEAR(mc.a[ix], 1.0, 1e-12);
    EXPECT_NEAR(mc.b0[ix], 0.0, 1e-12);
    EXPECT_NEAR(mc.b1[ix], 0.0, 1e-12);
    EXPECT_NEAR(mc.b2[ix], 0.0, 1e-12);
    EXPECT_NEAR(mc.c[ix], 0.0, 1e-12);
  }
}

TEST(Projection, OddFieldsHaveNoEvenCoefficients) {
  auto g = PhaseGrid::make(16, 5.5, 4, 1);
  Projector pr(g);
  auto f = landau::lift(g, [](const double*, const double* v) {
    const double s = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    return (v[0] + 0.5 * v[1] * v[1] * v[1]) * std::exp(-0.5 * s);
  });
  auto mc = pr.macro_coefficients(f);
  double bmax = 0.0;
  for (std::size_t ix = 0; ix < g.nxt(); ++ix)
    bmax = std::max(bmax, std::abs(mc.b0[ix]));
  ASSERT_GT(bmax, 0.1);  // the odd part is seen by b
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    EXPECT_NEAR(mc.a[ix], 0.0, 1e-12 * bmax);
    EXPECT_NEAR(mc.c[ix], 0.0, 1e-12 * bmax);
  }
}

TEST(Projection, ComplementHasVanishingCoefficients) {
  auto g = PhaseGrid::make(12, 5.5, 4, 1);
  Projector pr(g);
  Field h = random_field(g, 42);
  Field f = pr.apply_IminusP(h);
  auto mc = pr.macro_coefficients(f);
  const double scale = l2(h);
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    EXPECT_NEAR(mc.a[ix], 0.0, 1e-10 * scale);
    EXPECT_NEAR(mc.b0[ix], 0.0, 1e-10 * scale);
    EXPECT_NEAR(mc.b1[ix], 0.0, 1e-10 * scale);
    EXPECT_NEAR(mc.b2[ix], 0.0, 1e-10 * scale);
    EXPECT_NEAR(mc.c[ix], 0.0, 1e-10 * scale);
  }
}

TEST(Projection, IdempotentOrthogonalPythagoras) {
  auto g = PhaseGrid::make(12, 5.5, 4, 1);
  Projector pr(g);
  Field f = random_field(g, 7);

  Field pf = pr.apply_P(f);
  Field ppf = pr.apply_P(pf);
  double dmax = 0.0, pmax = 0.0;
  for (std::size_t i = 0; i < f.data.size(); ++i) {
    dmax = std::max(dmax, std::abs(ppf.data[i] - pf.data[i]));
    pmax = std::max(pmax, std::abs(pf.data[i]));
  }
  EXPECT_LE(dmax, 1e-10 * pmax);

  // <(I-P)f, psi_k> = 0 per x-node.
  Field rf = pr.apply_IminusP(f);
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    const double* blk = rf.x_block(ix);
    for (int k = 0; k < 5; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.nv3(); ++i)
        s += pr.basis(k)[i] * blk[i];
      EXPECT_NEAR(s * g.dv3(), 0.0, 1e-12 * l2(f));
    }
  }

  const double n2f = l2(f) * l2(f);
  const double n2p = l2(pf) * l2(pf);
  const double n2r = l2(rf) * l2(rf);
  EXPECT_NEAR(n2p + n2r, n2f, 1e-10 * n2f);
}

// Fields whose global invariants vanish (spatially integrated moments of
// sqrt(mu), v sqrt(mu), |v|^2 sqrt(mu)) have x-averaged projection
// coefficients zero.
TEST(Projection, ConservationDataHasZeroMeanCoefficients) {
  auto g = PhaseGrid::make(12, 5.5, 8, 1);
  Projector pr(g);
  Field f = random_field(g, 31);

  // Remove the global span component: subtract the x-uniform projection
  // built from x-averaged coefficients.
  auto mc0 = pr.macro_coefficients(f);
  double mean[5] = {0, 0, 0, 0, 0};
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    mean[0] += mc0.a[ix];
    mean[1] += mc0.b0[ix];
    mean[2] += mc0.b1[ix];
    mean[3] += mc0.b2[ix];
    mean[4] += mc0.c[ix];
  }
  for (double& m : mean) m /= g.nxt();
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    double* blk = f.x_block(ix);
    for (std::size_t i = 0; i < g.nv3(); ++i)
      for (int k = 0; k < 5; ++k) blk[i] -= mean[k] * pr.basis(k)[i];
  }

  auto mc = pr.macro_coefficients(f);
  double avg[5] = {0, 0, 0, 0, 0};
  for (std::size_t ix = 0; ix < g.nxt(); ++ix) {
    avg[0] += mc.a[ix];
    avg[1] += mc.b0[ix];
    avg[2] += mc.b1[ix];
    avg[3] += mc.b2[ix];
    avg[4] += mc.c[ix];
  }
  for (int k = 0; k < 5; ++k)
    EXPECT_NEAR(avg[k] / g.nxt(), 0.0, 1e-12);
}

TEST(Projection, RejectsGridMismatch) {
  auto g = PhaseGrid::make(12, 5.5, 4, 1);
  auto g2 = PhaseGrid::make(16, 5.5, 4, 1);
  Projector pr(g);
  Field f(g2);
  EXPECT_THROW(pr.macro_coefficients(f), std::invalid_argument);
}
