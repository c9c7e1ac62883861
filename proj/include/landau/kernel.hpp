#pragma once

// The Coulomb interaction kernel
//     phi^{ij}(v) = (delta_ij - v_i v_j / |v|^2) / |v|,
// its tabulation on the zero-padded velocity grid, and everything built by
// convolving against it: the diffusion matrix sigma_u = phi * u, spectral
// derivatives of sigma, the drift vector, vector convolutions phi^{ij} * u_j,
// and the quadratic form with its parallel/perpendicular eigenstructure.
//
// Convolution layout: sources are zero-padded from nv^3 into the low corner
// of a (2 nv)^3 cube so the circular FFT convolution is linear (the kernel
// has unbounded support; without padding the tails would wrap).  The kernel
// cube is tabulated with wrapped signed distances; its origin cell holds the
// exact analytic cell average of phi (the |v|^{-1} singularity is
// integrable), and for the odd off-diagonal components the sign-ambiguous
// half-period planes are set to zero.  Node differences never land on those
// planes, so this is a pure tie-break, not an approximation.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "landau/fft.hpp"
#include "landau/grid.hpp"

namespace landau {

inline std::complex<double>* as_std(fftw_complex* p) {
  return reinterpret_cast<std::complex<double>*>(p);
}
inline const std::complex<double>* as_std(const fftw_complex* p) {
  return reinterpret_cast<const std::complex<double>*>(p);
}

// Pointwise kernel matrix, |v| replaced by max(|v|, reg).
inline Eigen::Matrix3d phi_matrix(const Eigen::Vector3d& v, double reg = 0.0) {
  const double r = v.norm();
  if (r == 0.0 && reg == 0.0)
    throw std::invalid_argument("phi_matrix: v = 0 requires reg > 0");
  const double re = std::max(r, reg);
  return (Eigen::Matrix3d::Identity() - (v * v.transpose()) / (re * re)) / re;
}

namespace detail {

// Gauss-Legendre nodes/weights on [0,1].
inline void gauss_legendre_01(int n, std::vector<double>& x,
                              std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (t + 1.0);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace detail

// Integral of 1/|x| over the unit cube [0,1]^3.  Splitting by the largest
// coordinate gives three congruent pieces whose radial part integrates
// exactly, leaving (3/2) * Int_{[0,1]^2} dS dT / sqrt(1 + S^2 + T^2).
inline double unit_cube_inv_dist_integral() {
  static const double val = [] {
    std::vector<double> x, w;
    detail::gauss_legendre_01(32, x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j)
        s += w[i] * w[j] / std::sqrt(1.0 + x[i] * x[i] + x[j] * x[j]);
    return 1.5 * s;
  }();
  return val;
}

// Symmetric 3x3 matrix field over one nv^3 velocity block, upper triangle
// packed as 00,01,02,11,12,22.
struct SigmaBlock {
  std::array<std::vector<double>, 6> comp;

  static constexpr int cidx(int i, int j) {
    const int a = i < j ? i : j;
    const int b = i < j ? j : i;
    return a == 0 ? b : (a == 1 ? 2 + b : 5);
  }

  void resize(std::size_t n) {
    for (auto& c : comp) c.assign(n, 0.0);
  }
  std::size_t size() const { return comp[0].size(); }

  double operator()(std::size_t node, int i, int j) const {
    return comp[cidx(i, j)][node];
  }

  Eigen::Matrix3d at(std::size_t node) const {
    Eigen::Matrix3d m;
    m(0, 0) = comp[0][node];
    m(0, 1) = m(1, 0) = comp[1][node];
    m(0, 2) = m(2, 0) = comp[2][node];
    m(1, 1) = comp[3][node];
    m(1, 2) = m(2, 1) = comp[4][node];
    m(2, 2) = comp[5][node];
    return m;
  }

  SigmaBlock& add_scaled(const SigmaBlock& o, double s) {
    for (int c = 0; c < 6; ++c)
      for (std::size_t i = 0; i < comp[c].size(); ++i)
        comp[c][i] += s * o.comp[c][i];
    return *this;
  }
};

inline double quadratic_form_D(const SigmaBlock& s, std::size_t node,
                               const Eigen::Vector3d& nu) {
  return nu.dot(s.at(node) * nu);
}

struct EigenSplit {
  double lambda_par = 0.0;
  double lambda_perp[2] = {0.0, 0.0};  // ascending
  Eigen::Vector3d dir_par = Eigen::Vector3d::Zero();
};

// Eigen-decomposition with the eigenvector most aligned to v reported as the
// parallel one.
inline EigenSplit eigen_split(const SigmaBlock& s, const PhaseGrid& g,
                              std::size_t node) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s.at(node));
  Eigen::Vector3d v(g.V[0][node], g.V[1][node], g.V[2][node]);
  const double vn = v.norm();
  const Eigen::Vector3d vhat =
      vn > 0.0 ? Eigen::Vector3d(v / vn) : Eigen::Vector3d::UnitX();
  int best = 0;
  double ba = -1.0;
  for (int k = 0; k < 3; ++k) {
    const double a = std::abs(es.eigenvectors().col(k).dot(vhat));
    if (a > ba) {
      ba = a;
      best = k;
    }
  }
  EigenSplit out;
  out.lambda_par = es.eigenvalues()[best];
  out.dir_par = es.eigenvectors().col(best);
  int m = 0;
  for (int k = 0; k < 3; ++k)
    if (k != best) out.lambda_perp[m++] = es.eigenvalues()[k];
  return out;
}

// Per-worker scratch for convolutions (all fftw_malloc-aligned).
struct ConvScratch {
  RealBuf r;
  CplxBuf acc, acc2;
  explicit ConvScratch(int P)
      : r(static_cast<std::size_t>(P) * P * P),
        acc(static_cast<std::size_t>(P) * P * (P / 2 + 1)),
        acc2(static_cast<std::size_t>(P) * P * (P / 2 + 1)) {}
};

class KernelTab {
 public:
  explicit KernelTab(const PhaseGrid& g)
      : grid_(&g), P_(2 * g.nv), fft_(P_) {
    tabulate();
  }
  KernelTab(const KernelTab&) = delete;
  KernelTab& operator=(const KernelTab&) = delete;

  const PhaseGrid& grid() const { return *grid_; }
  int P() const { return P_; }
  const Real3Fft& fft() const { return fft_; }
  std::size_t chat_size() const { return fft_.cplx_size(); }

  const std::complex<double>* chat(int c) const {
    return as_std(comp_hat_[c].data());
  }
  // Wavenumbers on the padded grid (half-period bins zeroed).
  const std::vector<double>& kfull() const { return kfull_; }
  const std::vector<double>& kred() const { return kred_; }

  // uhat <- FFT(zero-pad(u)) * dv^3 : the transform of a gridded source,
  // scaled so that kernel_hat * uhat inverse-transforms to the quadrature
  // approximation of the continuous convolution.
  void pad_fft(ConvScratch& ws, const double* u,
               std::complex<double>* uhat) const {
    pad_into(grid_->nv, u, ws.r.data());
    fft_.forward(ws.r.data(), reinterpret_cast<fftw_complex*>(uhat));
    const double s = grid_->dv3();
    const std::size_t n = chat_size();
    for (std::size_t i = 0; i < n; ++i) uhat[i] *= s;
  }

  // sigma_u^{ij} = phi^{ij} * u from a prepared transform.
  void sigma_from_hat(ConvScratch& ws, const std::complex<double>* uhat,
                      SigmaBlock& out) const {
    out.resize(grid_->nv3());
    std::complex<double>* acc = as_std(ws.acc.data());
    const std::size_t n = chat_size();
    for (int c = 0; c < 6; ++c) {
      const std::complex<double>* kh = chat(c);
      for (std::size_t i = 0; i < n; ++i) acc[i] = kh[i] * uhat[i];
      fft_.inverse(ws.acc.data(), ws.r.data());
      restrict_from(grid_->nv, ws.r.data(), out.comp[c].data());
    }
  }

  // out[j] = sum_i d/dv_i sigma_u^{ij}, spectral derivative on the padded
  // transform.
  void dsigma_div_from_hat(ConvScratch& ws, const std::complex<double>* uhat,
                           std::vector<double>* out) const {
    const int H = P_ / 2 + 1;
    std::complex<double>* acc = as_std(ws.acc.data());
    for (int j = 0; j < 3; ++j) {
      out[j].resize(grid_->nv3());
      std::size_t idx = 0;
      for (int a = 0; a < P_; ++a)
        for (int b = 0; b < P_; ++b)
          for (int c = 0; c < H; ++c, ++idx) {
            const double k[3] = {kfull_[a], kfull_[b], kred_[c]};
            std::complex<double> s(0.0, 0.0);
            for (int i = 0; i < 3; ++i)
              s += k[i] * chat(SigmaBlock::cidx(i, j))[idx];
            acc[idx] =
                std::complex<double>(-s.imag(), s.real()) * uhat[idx];
          }
      fft_.inverse(ws.acc.data(), ws.r.data());
      restrict_from(grid_->nv, ws.r.data(), out[j].data());
    }
  }

  // S_i = sum_j phi^{ij} * u_j; optionally also the spectral divergence
  // divS = sum_i d/dv_i S_i.
  void conv_vector_from_hats(ConvScratch& ws,
                             const std::complex<double>* const uhat[3],
                             std::vector<double>* S,
                             std::vector<double>* divS) const {
    const int H = P_ / 2 + 1;
    const std::size_t n = chat_size();
    std::complex<double>* acc = as_std(ws.acc.data());
    std::complex<double>* acc2 = as_std(ws.acc2.data());
    if (divS) std::fill(acc2, acc2 + n, std::complex<double>(0.0, 0.0));
    for (int i = 0; i < 3; ++i) {
      std::size_t idx = 0;
      for (int a = 0; a < P_; ++a)
        for (int b = 0; b < P_; ++b)
          for (int c = 0; c < H; ++c, ++idx) {
            std::complex<double> s(0.0, 0.0);
            for (int j = 0; j < 3; ++j)
              s += chat(SigmaBlock::cidx(i, j))[idx] * uhat[j][idx];
            acc[idx] = s;
            if (divS) {
              const double ki = (i == 0 ? kfull_[a] : (i == 1 ? kfull_[b]
                                                              : kred_[c]));
              acc2[idx] += std::complex<double>(-ki * s.imag(),
                                                ki * s.real());
            }
          }
      fft_.inverse(ws.acc.data(), ws.r.data());
      S[i].resize(grid_->nv3());
      restrict_from(grid_->nv, ws.r.data(), S[i].data());
    }
    if (divS) {
      fft_.inverse(ws.acc2.data(), ws.r.data());
      divS->resize(grid_->nv3());
      restrict_from(grid_->nv, ws.r.data(), divS->data());
    }
  }

  // X_i = sum_j phi^{ij} * (2 v_j W + d W/d v_j), assembled spectrally from
  // the transforms of W and of the v_j-weighted W.
  void collision_X_from_hats(ConvScratch& ws,
                             const std::complex<double>* What,
                             const std::complex<double>* const vWhat[3],
                             std::vector<double>* X) const {
    const int H = P_ / 2 + 1;
    std::complex<double>* acc = as_std(ws.acc.data());
    for (int i = 0; i < 3; ++i) {
      std::size_t idx = 0;
      for (int a = 0; a < P_; ++a)
        for (int b = 0; b < P_; ++b)
          for (int c = 0; c < H; ++c, ++idx) {
            const double k[3] = {kfull_[a], kfull_[b], kred_[c]};
            std::complex<double> s(0.0, 0.0);
            for (int j = 0; j < 3; ++j) {
              const std::complex<double> dW(-k[j] * What[idx].imag(),
                                            k[j] * What[idx].real());
              s += chat(SigmaBlock::cidx(i, j))[idx] *
                   (2.0 * vWhat[j][idx] + dW);
            }
            acc[idx] = s;
          }
      fft_.inverse(ws.acc.data(), ws.r.data());
      X[i].resize(grid_->nv3());
      restrict_from(grid_->nv, ws.r.data(), X[i].data());
    }
  }

  // out = sum_ij d_i d_j phi^{ij} * u, the double-divergence contraction of
  // the kernel against a source, evaluated spectrally on the padded box.
  void dd_contract_from_hat(ConvScratch& ws,
                            const std::complex<double>* uhat,
                            std::vector<double>& out) const {
    const int H = P_ / 2 + 1;
    std::complex<double>* acc = as_std(ws.acc.data());
    std::size_t idx = 0;
    for (int a = 0; a < P_; ++a)
      for (int b = 0; b < P_; ++b)
        for (int c = 0; c < H; ++c, ++idx) {
          const double k[3] = {kfull_[a], kfull_[b], kred_[c]};
          std::complex<double> s(0.0, 0.0);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              s -= k[i] * k[j] * chat(SigmaBlock::cidx(i, j))[idx];
          acc[idx] = s * uhat[idx];
        }
    fft_.inverse(ws.acc.data(), ws.r.data());
    out.resize(grid_->nv3());
    restrict_from(grid_->nv, ws.r.data(), out.data());
  }

  // a^j = -2 (sigma_u v)^j - sum_i d/dv_i sigma_u^{ij} for u = sqrt(mu) g.
  void drift_from_hat(ConvScratch& ws, const std::complex<double>* uhat,
                      const SigmaBlock& sig, std::vector<double>* a) const {
    std::vector<double> dd[3];
    dsigma_div_from_hat(ws, uhat, dd);
    const PhaseGrid& g = *grid_;
    const std::size_t n3 = g.nv3();
    for (int j = 0; j < 3; ++j) {
      a[j].resize(n3);
      for (std::size_t m = 0; m < n3; ++m)
        a[j][m] = -2.0 * (sig(m, j, 0) * g.V[0][m] + sig(m, j, 1) * g.V[1][m] +
                          sig(m, j, 2) * g.V[2][m]) -
                  dd[j][m];
    }
  }

 private:
  void tabulate() {
    const PhaseGrid& g = *grid_;
    const int nv = g.nv;
    const double Lp = P_ * g.dv;
    kfull_.resize(P_);
    for (int m = 0; m < P_; ++m) {
      const int f = (m <= P_ / 2) ? m : m - P_;
      kfull_[m] = 2.0 * M_PI * f / Lp;
    }
    kfull_[P_ / 2] = 0.0;
    kred_.resize(P_ / 2 + 1);
    for (int m = 0; m <= P_ / 2; ++m) kred_[m] = 2.0 * M_PI * m / Lp;
    kred_[P_ / 2] = 0.0;

    // Wrapped signed distances; index nv is the sign-ambiguous plane.
    std::vector<double> dist(P_);
    for (int m = 0; m < P_; ++m)
      dist[m] = ((m <= nv) ? m : m - P_) * g.dv;

    const double diag0 =
        4.0 * unit_cube_inv_dist_integral() / (3.0 * g.dv);

    RealBuf arr(fft_.real_size());
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        const int c = SigmaBlock::cidx(i, j);
        comp_hat_[c] = CplxBuf(chat_size());
        std::size_t idx = 0;
        for (int ma = 0; ma < P_; ++ma)
          for (int mb = 0; mb < P_; ++mb)
            for (int mc = 0; mc < P_; ++mc, ++idx) {
              const double d[3] = {dist[ma], dist[mb], dist[mc]};
              double val;
              if (ma == 0 && mb == 0 && mc == 0) {
                val = (i == j) ? diag0 : 0.0;
              } else {
                const double r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                const double r = std::sqrt(r2);
                val = (((i == j) ? 1.0 : 0.0) - d[i] * d[j] / r2) / r;
              }
              if (i != j) {
                const int mi = (i == 0 ? ma : (i == 1 ? mb : mc));
                const int mj = (j == 0 ? ma : (j == 1 ? mb : mc));
                if (mi == nv || mj == nv) val = 0.0;
              }
              arr[idx] = val;
            }
        fft_.forward(arr.data(), comp_hat_[c].data());
      }
  }

  const PhaseGrid* grid_;
  int P_;
  Real3Fft fft_;
  std::array<CplxBuf, 6> comp_hat_;
  std::vector<double> kfull_, kred_;
};

// sigma_u for a velocity profile (x-independent source).
inline SigmaBlock convolve_sigma(const KernelTab& kt,
                                 const std::vector<double>& u) {
  if (u.size() != kt.grid().nv3())
    throw std::invalid_argument("convolve_sigma: source does not match grid");
  ConvScratch ws(kt.P());
  CplxBuf uh(kt.chat_size());
  kt.pad_fft(ws, u.data(), as_std(uh.data()));
  SigmaBlock out;
  kt.sigma_from_hat(ws, as_std(uh.data()), out);
  return out;
}

// Drift vector for a velocity-profile perturbation g (source u = sqrt(mu) g).
inline std::array<std::vector<double>, 3> drift_a(
    const KernelTab& kt, const std::vector<double>& gprof) {
  const PhaseGrid& g = kt.grid();
  if (gprof.size() != g.nv3())
    throw std::invalid_argument("drift_a: source does not match grid");
  std::vector<double> u(g.nv3());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = g.smu[i] * gprof[i];
  ConvScratch ws(kt.P());
  CplxBuf uh(kt.chat_size());
  kt.pad_fft(ws, u.data(), as_std(uh.data()));
  SigmaBlock sig;
  kt.sigma_from_hat(ws, as_std(uh.data()), sig);
  std::array<std::vector<double>, 3> a;
  kt.drift_from_hat(ws, as_std(uh.data()), sig, a.data());
  return a;
}

}  // namespace landau
