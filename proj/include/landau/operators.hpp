#pragma once

// The collision operators as field-to-field maps: the linearized pieces A, K,
// L = -A - K, the bilinear form Gamma[g, .], the coefficient-frozen
// rearranged operators Abar_g / Kbar_g with their weight-conjugated variants,
// and the zeroth-order decomposition pieces K1 and J_g.
//
// Conventions, fixed once here and relied on throughout:
//  - velocity derivatives of the unknown f are centered second-order finite
//    differences; inner derivatives (the ones a flux divergence will act on)
//    use one-sided boundary rows, outer divergences use ghost-zero rows;
//  - coefficient fields (sigma tensors, S, drifts) come from the kernel
//    module's padded FFT convolutions, with derivatives of *coefficients*
//    taken spectrally;
//  - A has two assemblies: the flux form of its defining display, and a
//    Maxwellian-factored form mu^{-1/2} D_i[mu sigma^{ij} D_j(mu^{-1/2} f)]
//    whose outer divergence is shared with K so that the collision
//    invariants cancel structurally (this pairing is what apply_L uses);
//  - K keeps its inner derivative spectral (applied to W = sqrt(mu) f inside
//    the convolution); K1 is the same expression with the outer divergence
//    assembled by plain division instead of ratio weights, kept as an
//    independent second path.
//
// An OperatorContext freezes (grid, g, theta) at construction and
// precomputes every coefficient tensor; all apply_* methods are const and
// thread-safe, and parallelize over spatial nodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "landau/deriv.hpp"
#include "landau/fft.hpp"
#include "landau/grid.hpp"
#include "landau/kernel.hpp"
#include "landau/parallel.hpp"

namespace landau {

// Report on how much of a field lives at the velocity-truncation boundary,
// where the one-sided closures assume negligible data.
struct BoundaryTail {
  double ratio = 0.0;  // max |f| over boundary nodes / max |f| overall
  bool flagged = false;
  static constexpr double kThreshold = 1e-7;
};

class OperatorContext {
 public:
  OperatorContext(const KernelTab& kt, const Field& g, double theta)
      : kt_(&kt), grid_(&kt.grid()), theta_(theta), g_(g) {
    if (!g.grid || !g.grid->same_as(*grid_))
      throw std::invalid_argument(
          "OperatorContext: coefficient field grid mismatch");
    precompute_static();
    precompute_per_x();
  }

  OperatorContext(const OperatorContext&) = delete;
  OperatorContext& operator=(const OperatorContext&) = delete;

  const PhaseGrid& grid() const { return *grid_; }
  const KernelTab& kernel() const { return *kt_; }
  double theta() const { return theta_; }
  const Field& coefficient_field() const { return g_; }

  const SigmaBlock& sigma_mu() const { return sigma_mu_; }
  const SigmaBlock& sigma_g(std::size_t ix) const { return xc_[ix].sigma_g; }
  const SigmaBlock& sigma_G(std::size_t ix) const { return xc_[ix].sigma_G; }
  const std::array<std::vector<double>, 3>& S(std::size_t ix) const {
    return xc_[ix].S;
  }
  const std::vector<double>& divS(std::size_t ix) const {
    return xc_[ix].divS;
  }
  const std::array<std::vector<double>, 3>& drift(std::size_t ix) const {
    return xc_[ix].a;
  }
  const std::vector<double>& div_sigma_i() const { return div_sigma_i_; }
  const std::vector<double>& sigma_vv() const { return sigma_vv_; }
  const std::vector<double>& jg_mult(std::size_t ix) const {
    return xc_[ix].jg_mult;
  }
  const std::vector<double>& theta_mult(std::size_t ix) const {
    return xc_[ix].theta_mult;
  }
  // Contracted weight-gradient profile sum_i (d_i w^th / w^th) sigma_G^{ij}.
  const std::array<std::vector<double>, 3>& rsig(std::size_t ix) const {
    return xc_[ix].rsig;
  }
  const std::vector<double>& wtheta() const { return wth_; }

  // A f = d_i[sigma^{ij} d_j f] - sigma^{ij} v_i v_j f + (d_i sigma^i) f
  // with sigma = sigma_mu; flux assembly of the defining display.
  Field apply_A(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    const std::size_t n3 = grid_->nv3();
    parallel_for(static_cast<int>(grid_->nxt()), [&](int ix, int) {
      BlockWork w(n3);
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      flux_divergence(sigma_mu_, fb, w, ob);
      for (std::size_t m = 0; m < n3; ++m)
        ob[m] += (div_sigma_i_[m] - sigma_vv_[m]) * fb[m];
    });
    return out;
  }

  // Same operator assembled as mu^{-1/2} D_i[mu sigma^{ij} D_j(mu^{-1/2} f)]
  // with ratio-weighted stencils; exactly annihilates sqrt(mu).
  Field apply_A_factored(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    const std::size_t n3 = grid_->nv3();
    parallel_for(static_cast<int>(grid_->nxt()), [&](int ix, int) {
      BlockWork w(n3);
      const double* fb = f.x_block(ix);
      for (int j = 0; j < 3; ++j)
        d_gauss_factored(*grid_, fb, j, w.df[j].data());
      contract_sigma(sigma_mu_, w.df, w.t);
      const double* Z[3] = {w.t[0].data(), w.t[1].data(), w.t[2].data()};
      div_gauss_weighted(*grid_, Z, 1.0, out.x_block(ix));
    });
    return out;
  }

  // K f = -mu^{-1/2} d_i { mu [phi^{ij} * (2 v_j W + d_j W)] }, W = mu^{1/2} f,
  // inner derivative spectral, outer divergence ratio-weighted.
  Field apply_K(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    apply_K_impl(f, out, /*plain_division=*/false);
    return out;
  }

  // The same defining expression with the outer divergence assembled by
  // plain division; independent second path used to pin the first.
  Field apply_K1(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    apply_K_impl(f, out, /*plain_division=*/true);
    return out;
  }

  // L = -A - K with the factored A assembly, so that the discrete collision
  // invariants are annihilated up to the kernel tabulation error.
  Field apply_L(const Field& f) const {
    Field a = apply_A_factored(f);
    Field k = apply_K(f);
    Field out(*grid_);
    for (std::size_t i = 0; i < out.data.size(); ++i)
      out.data[i] = -a.data[i] - k.data[i];
    return out;
  }

  // Gamma[g, f] with the context's frozen g:
  //   d_i[sigma_g^{ij} d_j f] - v_i sigma_g^{ij} d_j f
  //   - S_i d_i f - (d_i S_i) f + (v_i S_i) f,
  // where sigma_g = phi * (sqrt(mu) g) and S_i = phi^{ij} * (sqrt(mu) d_j g).
  Field apply_Gamma(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    const std::size_t n3 = grid_->nv3();
    parallel_for(static_cast<int>(grid_->nxt()), [&](int ix, int) {
      const XCoef& xc = xc_[ix];
      BlockWork w(n3);
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      flux_divergence(xc.sigma_g, fb, w, ob);
      for (std::size_t m = 0; m < n3; ++m) {
        double drift = 0.0, sgrad = 0.0, vs = 0.0;
        for (int i = 0; i < 3; ++i) {
          drift += grid_->V[i][m] * w.t[i][m];
          sgrad += xc.S[i][m] * w.df[i][m];
          vs += grid_->V[i][m] * xc.S[i][m];
        }
        ob[m] += -drift - sgrad + (vs - xc.divS[m]) * fb[m];
      }
    });
    return out;
  }

  // Abar_g f = div(sigma_G grad f) + a_g . grad f with the drift in its
  // literal two-term action -v_i sigma_{sqrt(mu) g}^{ij} d_j f - S_i d_i f.
  Field apply_Abar(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    abar_impl(f, out, /*with_theta=*/false);
    return out;
  }

  // Abar_g^theta = Abar_g - 2 (d_i w^theta / w^theta) sigma_G^{ij} d_j.
  Field apply_Abar_theta(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    abar_impl(f, out, /*with_theta=*/true);
    return out;
  }

  // Kbar_g f = K f + (d_i sigma^i) f + J_g f.
  Field apply_Kbar(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    apply_K_impl(f, out, /*plain_division=*/false);
    const std::size_t n3 = grid_->nv3();
    for (std::size_t ix = 0; ix < grid_->nxt(); ++ix) {
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      const std::vector<double>& jg = xc_[ix].jg_mult;
      for (std::size_t m = 0; m < n3; ++m)
        ob[m] = ob[m] + div_sigma_i_[m] * fb[m] + jg[m] * fb[m];
    }
    return out;
  }

  // Kbar_g^theta f = w^theta Kbar_g f + M_theta (w^theta f) with
  // M_theta = 2 (d_i w^th d_j w^th / w^{2 th}) sigma_G^{ij}
  //           - (d_ij w^th / w^th) sigma_G^{ij}
  //           - (d_j w^th / w^th) d_i sigma_G^{ij}
  //           - (d_i w^th / w^th) a_g^i,
  // assembled from precomputed weight-derivative profiles.
  Field apply_Kbar_theta(const Field& f) const {
    Field out = apply_Kbar(f);
    const std::size_t n3 = grid_->nv3();
    for (std::size_t ix = 0; ix < grid_->nxt(); ++ix) {
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      const std::vector<double>& tm = xc_[ix].theta_mult;
      for (std::size_t m = 0; m < n3; ++m)
        ob[m] = wth_[m] * ob[m] + tm[m] * (wth_[m] * fb[m]);
    }
    return out;
  }

  // J_g f = -v . sigma v f - (d_i S_i) f + (v_i S_i) f: a pure multiplier.
  Field apply_Jg(const Field& f) const {
    require_grid(f);
    Field out(*grid_);
    const std::size_t n3 = grid_->nv3();
    for (std::size_t ix = 0; ix < grid_->nxt(); ++ix) {
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      const std::vector<double>& jg = xc_[ix].jg_mult;
      for (std::size_t m = 0; m < n3; ++m) ob[m] = jg[m] * fb[m];
    }
    return out;
  }

  // How much of |f| sits on the outermost velocity shell, where the
  // one-sided closures assume the data is negligible.
  BoundaryTail boundary_tail(const Field& f) const {
    require_grid(f);
    const int nv = grid_->nv;
    double all = 0.0, bdry = 0.0;
    for (std::size_t ix = 0; ix < grid_->nxt(); ++ix) {
      const double* fb = f.x_block(ix);
      std::size_t m = 0;
      for (int a = 0; a < nv; ++a)
        for (int b = 0; b < nv; ++b)
          for (int c = 0; c < nv; ++c, ++m) {
            const double v = std::abs(fb[m]);
            all = std::max(all, v);
            if (a == 0 || a == nv - 1 || b == 0 || b == nv - 1 || c == 0 ||
                c == nv - 1)
              bdry = std::max(bdry, v);
          }
    }
    BoundaryTail r;
    r.ratio = all > 0.0 ? bdry / all : 0.0;
    r.flagged = r.ratio > BoundaryTail::kThreshold;
    return r;
  }

 private:
  struct XCoef {
    SigmaBlock sigma_g;
    SigmaBlock sigma_G;
    std::array<std::vector<double>, 3> S;
    std::vector<double> divS;
    std::array<std::vector<double>, 3> dsig_div_g;
    std::array<std::vector<double>, 3> a;  // drift realization form
    std::vector<double> jg_mult;
    std::vector<double> theta_mult;
    std::array<std::vector<double>, 3> rsig;  // sum_i r1_i sigma_G^{ij}
  };

  // Per-block scratch for derivative/flux assembly.
  struct BlockWork {
    std::vector<double> df[3], t[3], tmp;
    explicit BlockWork(std::size_t n3) : tmp(n3) {
      for (int i = 0; i < 3; ++i) {
        df[i].resize(n3);
        t[i].resize(n3);
      }
    }
  };

  struct FftScratch {
    ConvScratch ws;
    CplxBuf h0, h1, h2, h3;
    explicit FftScratch(const KernelTab& kt)
        : ws(kt.P()),
          h0(kt.chat_size()),
          h1(kt.chat_size()),
          h2(kt.chat_size()),
          h3(kt.chat_size()) {}
  };

  void require_grid(const Field& f) const {
    if (!f.grid || !f.grid->same_as(*grid_))
      throw std::invalid_argument("operator applied to mismatched grid");
  }

  // t_i = sum_j sigma^{ij} df_j from one-sided derivatives of f, then the
  // ghost-zero outer divergence accumulated into out.
  void flux_divergence(const SigmaBlock& sig, const double* fb, BlockWork& w,
                       double* out) const {
    const std::size_t n3 = grid_->nv3();
    for (int j = 0; j < 3; ++j)
      d_center(*grid_, fb, j, Closure::OneSided, w.df[j].data());
    contract_sigma(sig, w.df, w.t);
    std::fill(out, out + n3, 0.0);
    for (int i = 0; i < 3; ++i) {
      d_center(*grid_, w.t[i].data(), i, Closure::GhostZero, w.tmp.data());
      for (std::size_t m = 0; m < n3; ++m) out[m] += w.tmp[m];
    }
  }

  static void contract_sigma(const SigmaBlock& sig,
                             const std::vector<double> (&df)[3],
                             std::vector<double> (&t)[3]) {
    const std::size_t n3 = df[0].size();
    for (int i = 0; i < 3; ++i)
      for (std::size_t m = 0; m < n3; ++m)
        t[i][m] = sig(m, i, 0) * df[0][m] + sig(m, i, 1) * df[1][m] +
                  sig(m, i, 2) * df[2][m];
  }

  void abar_impl(const Field& f, Field& out, bool with_theta) const {
    const std::size_t n3 = grid_->nv3();
    parallel_for(static_cast<int>(grid_->nxt()), [&](int ix, int) {
      const XCoef& xc = xc_[ix];
      BlockWork w(n3);
      const double* fb = f.x_block(ix);
      double* ob = out.x_block(ix);
      flux_divergence(xc.sigma_G, fb, w, ob);
      // Drift action: -v_i sigma_g^{ij} d_j f - S_i d_i f.
      for (int i = 0; i < 3; ++i)
        for (std::size_t m = 0; m < n3; ++m) {
          const double tg = xc.sigma_g(m, i, 0) * w.df[0][m] +
                            xc.sigma_g(m, i, 1) * w.df[1][m] +
                            xc.sigma_g(m, i, 2) * w.df[2][m];
          ob[m] -= grid_->V[i][m] * tg + xc.S[i][m] * w.df[i][m];
        }
      if (with_theta)
        for (int j = 0; j < 3; ++j)
          for (std::size_t m = 0; m < n3; ++m)
            ob[m] -= 2.0 * xc.rsig[j][m] * w.df[j][m];
    });
  }

  void apply_K_impl(const Field& f, Field& out, bool plain_division) const {
    const std::size_t n3 = grid_->nv3();
    const int nxt = static_cast<int>(grid_->nxt());
    const int nw = std::min(worker_count(), nxt);
    std::vector<std::unique_ptr<FftScratch>> scr(nw);
    for (int w = 0; w < nw; ++w) scr[w] = std::make_unique<FftScratch>(*kt_);

    parallel_for(
        nxt,
        [&](int ix, int w) {
          FftScratch& fs = *scr[w];
          const double* fb = f.x_block(ix);
          std::vector<double> W(n3), vW(n3), X[3];
          for (std::size_t m = 0; m < n3; ++m) W[m] = grid_->smu[m] * fb[m];
          kt_->pad_fft(fs.ws, W.data(), as_std(fs.h3.data()));
          std::complex<double>* vh[3] = {as_std(fs.h0.data()),
                                         as_std(fs.h1.data()),
                                         as_std(fs.h2.data())};
          for (int j = 0; j < 3; ++j) {
            for (std::size_t m = 0; m < n3; ++m)
              vW[m] = grid_->V[j][m] * W[m];
            kt_->pad_fft(fs.ws, vW.data(), vh[j]);
          }
          const std::complex<double>* vhc[3] = {vh[0], vh[1], vh[2]};
          kt_->collision_X_from_hats(fs.ws, as_std(fs.h3.data()), vhc, X);

          double* ob = out.x_block(ix);
          if (plain_division) {
            // -sum_i D_i^{ghost-zero}(mu X_i) / sqrt(mu), literally.
            std::vector<double> u(n3), tmp(n3);
            std::fill(ob, ob + n3, 0.0);
            for (int i = 0; i < 3; ++i) {
              for (std::size_t m = 0; m < n3; ++m)
                u[m] = grid_->mu[m] * X[i][m];
              d_center(*grid_, u.data(), i, Closure::GhostZero, tmp.data());
              for (std::size_t m = 0; m < n3; ++m) ob[m] += tmp[m];
            }
            for (std::size_t m = 0; m < n3; ++m)
              ob[m] = -ob[m] / grid_->smu[m];
          } else {
            // Ratio-weighted: -(1/smu) sum_i D_i(smu . (smu X_i)).
            std::vector<double> Z[3];
            for (int i = 0; i < 3; ++i) {
              Z[i].resize(n3);
              for (std::size_t m = 0; m < n3; ++m)
                Z[i][m] = grid_->smu[m] * X[i][m];
            }
            const double* Zp[3] = {Z[0].data(), Z[1].data(), Z[2].data()};
            div_gauss_weighted(*grid_, Zp, -1.0, ob);
          }
        },
        nw);
  }

  void precompute_static() {
    const PhaseGrid& g = *grid_;
    const std::size_t n3 = g.nv3();
    ConvScratch ws(kt_->P());
    CplxBuf muhat(kt_->chat_size());
    kt_->pad_fft(ws, g.mu.data(), as_std(muhat.data()));
    kt_->sigma_from_hat(ws, as_std(muhat.data()), sigma_mu_);
    kt_->dsigma_div_from_hat(ws, as_std(muhat.data()), dsig_div_mu_);

    sigma_vv_.resize(n3);
    div_sigma_i_.resize(n3);
    for (std::size_t m = 0; m < n3; ++m) {
      const double v[3] = {g.V[0][m], g.V[1][m], g.V[2][m]};
      double svv = 0.0, dv = 0.0, tr = 0.0;
      for (int i = 0; i < 3; ++i) {
        tr += sigma_mu_(m, i, i);
        dv += dsig_div_mu_[i][m] * v[i];
        for (int j = 0; j < 3; ++j) svv += sigma_mu_(m, i, j) * v[i] * v[j];
      }
      sigma_vv_[m] = svv;
      // d_i sigma^i = (d_i sigma^{ij}) v_j + trace(sigma).
      div_sigma_i_[m] = dv + tr;
    }

    // Weight-derivative profiles for the theta-conjugated operators, from
    // the closed-form derivatives of w^theta = (1 + |v|)^theta.  At a node
    // with v = 0 the radial direction is undefined; the profiles are set to
    // zero there (such a node exists only for odd nv).
    wth_.resize(n3);
    for (int i = 0; i < 3; ++i) r1_[i].assign(n3, 0.0);
    cth_.resize(n3);
    const double th = theta_;
    for (std::size_t m = 0; m < n3; ++m) {
      const double w = g.w[m];
      wth_[m] = std::pow(w, th);
      const double r = g.vabs[m];
      if (r == 0.0 || th == 0.0) {
        for (int c = 0; c < 6; ++c) cth_.comp[c][m] = 0.0;
        continue;
      }
      const double vh[3] = {g.V[0][m] / r, g.V[1][m] / r, g.V[2][m] / r};
      for (int i = 0; i < 3; ++i) r1_[i][m] = th * vh[i] / w;
      // 2 r1_i r1_j - d_ij w^th / w^th
      //   = th (th + 1) vh_i vh_j / w^2 - th (delta_ij - vh_i vh_j) / (w r).
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          const double rad = th * (th + 1.0) * vh[i] * vh[j] / (w * w);
          const double tan =
              th * ((i == j ? 1.0 : 0.0) - vh[i] * vh[j]) / (w * r);
          cth_.comp[SigmaBlock::cidx(i, j)][m] = rad - tan;
        }
    }
  }

  void precompute_per_x() {
    const PhaseGrid& g = *grid_;
    const std::size_t n3 = g.nv3();
    const int nxt = static_cast<int>(g.nxt());
    xc_.resize(nxt);
    const int nw = std::min(worker_count(), nxt);
    std::vector<std::unique_ptr<FftScratch>> scr(nw);
    for (int w = 0; w < nw; ++w) scr[w] = std::make_unique<FftScratch>(*kt_);

    parallel_for(
        nxt,
        [&](int ix, int w) {
          FftScratch& fs = *scr[w];
          XCoef& xc = xc_[ix];
          const double* gb = g_.x_block(ix);

          std::vector<double> u(n3);
          for (std::size_t m = 0; m < n3; ++m) u[m] = g.smu[m] * gb[m];
          std::complex<double>* uhat = as_std(fs.h3.data());
          kt_->pad_fft(fs.ws, u.data(), uhat);

          kt_->sigma_from_hat(fs.ws, uhat, xc.sigma_g);
          xc.sigma_G = sigma_mu_;
          xc.sigma_G.add_scaled(xc.sigma_g, 1.0);
          kt_->dsigma_div_from_hat(fs.ws, uhat, xc.dsig_div_g.data());
          kt_->drift_from_hat(fs.ws, uhat, xc.sigma_g, xc.a.data());

          // S_i = phi^{ij} * (sqrt(mu) d_j g); the source is expanded as
          // d_j(sqrt(mu) g) + v_j sqrt(mu) g so both pieces transform
          // exactly: hat_j = i k_j uhat + (v_j u)hat.
          std::complex<double>* sh[3] = {as_std(fs.h0.data()),
                                         as_std(fs.h1.data()),
                                         as_std(fs.h2.data())};
          std::vector<double> vu(n3);
          for (int j = 0; j < 3; ++j) {
            for (std::size_t m = 0; m < n3; ++m) vu[m] = g.V[j][m] * u[m];
            kt_->pad_fft(fs.ws, vu.data(), sh[j]);
          }
          const int P = kt_->P();
          const int H = P / 2 + 1;
          std::size_t idx = 0;
          for (int a = 0; a < P; ++a)
            for (int b = 0; b < P; ++b)
              for (int c = 0; c < H; ++c, ++idx) {
                const double k[3] = {kt_->kfull()[a], kt_->kfull()[b],
                                     kt_->kred()[c]};
                const std::complex<double> base = uhat[idx];
                for (int j = 0; j < 3; ++j)
                  sh[j][idx] += std::complex<double>(-k[j] * base.imag(),
                                                     k[j] * base.real());
              }
          const std::complex<double>* shc[3] = {sh[0], sh[1], sh[2]};
          kt_->conv_vector_from_hats(fs.ws, shc, xc.S.data(), &xc.divS);

          xc.jg_mult.resize(n3);
          xc.theta_mult.resize(n3);
          for (int j = 0; j < 3; ++j) xc.rsig[j].assign(n3, 0.0);
          for (std::size_t m = 0; m < n3; ++m) {
            double vs = 0.0;
            for (int i = 0; i < 3; ++i) vs += g.V[i][m] * xc.S[i][m];
            xc.jg_mult[m] = -sigma_vv_[m] - xc.divS[m] + vs;

            double tm = 0.0;
            for (int i = 0; i < 3; ++i) {
              tm += cth_(m, i, i) * xc.sigma_G(m, i, i);
              for (int j = i + 1; j < 3; ++j)
                tm += 2.0 * cth_(m, i, j) * xc.sigma_G(m, i, j);
            }
            for (int j = 0; j < 3; ++j) {
              tm -= r1_[j][m] * (dsig_div_mu_[j][m] + xc.dsig_div_g[j][m]);
              tm -= r1_[j][m] * xc.a[j][m];
            }
            xc.theta_mult[m] = tm;
            for (int j = 0; j < 3; ++j) {
              double rs = 0.0;
              for (int i = 0; i < 3; ++i)
                rs += r1_[i][m] * xc.sigma_G(m, i, j);
              xc.rsig[j][m] = rs;
            }
          }
        },
        nw);
  }

  const KernelTab* kt_;
  const PhaseGrid* grid_;
  double theta_;
  Field g_;

  SigmaBlock sigma_mu_;
  std::vector<double> dsig_div_mu_[3];
  std::vector<double> sigma_vv_;     // sigma_mu^{ij} v_i v_j
  std::vector<double> div_sigma_i_;  // d_i sigma^i
  std::vector<double> wth_;          // w^theta
  std::vector<double> r1_[3];        // d_i w^theta / w^theta
  SigmaBlock cth_;                   // 2 r1_i r1_j - d_ij w^theta / w^theta
  std::vector<XCoef> xc_;
};

}  // namespace landau
