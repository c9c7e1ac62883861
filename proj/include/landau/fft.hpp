#pragma once

// Thin RAII layer over FFTW3.
//
// Determinism policy: all plans are created with FFTW_ESTIMATE (planning by
// heuristics, not by timing runs), so the chosen algorithm — and hence the
// exact floating-point result — depends only on the transform size, never on
// machine load.  Plan creation and destruction are serialized through a
// global mutex (FFTW's planner is not thread-safe); execution uses the
// new-array interface, which is safe to call concurrently on distinct
// buffers.  All execution buffers must come from FftBuf so their alignment
// matches the buffers the plan was created with.

#include <fftw3.h>

#include <cstddef>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace landau {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// fftw_malloc-backed array (SIMD-aligned), move-only.
template <class T>
class FftBuf {
 public:
  FftBuf() = default;
  explicit FftBuf(std::size_t n) : n_(n) {
    p_ = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p_) throw std::bad_alloc();
    zero();
  }
  FftBuf(FftBuf&& o) noexcept : p_(o.p_), n_(o.n_) {
    o.p_ = nullptr;
    o.n_ = 0;
  }
  FftBuf& operator=(FftBuf&& o) noexcept {
    if (this != &o) {
      reset();
      p_ = o.p_;
      n_ = o.n_;
      o.p_ = nullptr;
      o.n_ = 0;
    }
    return *this;
  }
  FftBuf(const FftBuf&) = delete;
  FftBuf& operator=(const FftBuf&) = delete;
  ~FftBuf() { reset(); }

  T* data() { return p_; }
  const T* data() const { return p_; }
  T& operator[](std::size_t i) { return p_[i]; }
  const T& operator[](std::size_t i) const { return p_[i]; }
  std::size_t size() const { return n_; }
  void zero() {
    if (p_) std::memset(p_, 0, sizeof(T) * n_);
  }

 private:
  void reset() {
    if (p_) fftw_free(p_);
    p_ = nullptr;
    n_ = 0;
  }
  T* p_ = nullptr;
  std::size_t n_ = 0;
};

using RealBuf = FftBuf<double>;
using CplxBuf = FftBuf<fftw_complex>;

// Real-to-complex 3-D transform of size P x P x P (row-major), used for the
// zero-padded velocity-space convolutions with P = 2 nv.
class Real3Fft {
 public:
  explicit Real3Fft(int P)
      : P_(P), rscratch_(real_size()), cscratch_(cplx_size()) {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fwd_ = fftw_plan_dft_r2c_3d(P, P, P, rscratch_.data(), cscratch_.data(),
                                FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_3d(P, P, P, cscratch_.data(), rscratch_.data(),
                                FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("fft: plan creation failed");
  }
  ~Real3Fft() {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  Real3Fft(const Real3Fft&) = delete;
  Real3Fft& operator=(const Real3Fft&) = delete;

  int P() const { return P_; }
  std::size_t real_size() const {
    return static_cast<std::size_t>(P_) * P_ * P_;
  }
  std::size_t cplx_size() const {
    return static_cast<std::size_t>(P_) * P_ * (P_ / 2 + 1);
  }

  void forward(double* in, fftw_complex* out) const {
    fftw_execute_dft_r2c(fwd_, in, out);
  }
  // Unnormalized FFTW c2r divided by P^3, so inverse(forward(x)) == x up to
  // round-off.  NOTE: multi-dimensional c2r destroys its complex input.
  void inverse(fftw_complex* in, double* out) const {
    fftw_execute_dft_c2r(inv_, in, out);
    const double s = 1.0 / static_cast<double>(real_size());
    const std::size_t n = real_size();
    for (std::size_t i = 0; i < n; ++i) out[i] *= s;
  }

 private:
  int P_;
  RealBuf rscratch_;
  CplxBuf cscratch_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

// Batched real transform over the spatial axes of a phase-space field
// stored x-major, v-minor: rank dim_x of length nx per axis, nv^3 transforms
// with stride nv^3 between x-neighbors and distance 1 between batch members.
// Used by the transport sub-step (exact per-mode phase shift).
class XBatchFft {
 public:
  XBatchFft(int dim_x, int nx, std::size_t nv3)
      : dim_x_(dim_x), nx_(nx), nv3_(nv3),
        rscratch_(real_count()), cscratch_(cplx_count()) {
    int n[3] = {nx, nx, nx};
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fwd_ = fftw_plan_many_dft_r2c(
        dim_x, n, static_cast<int>(nv3), rscratch_.data(), nullptr,
        static_cast<int>(nv3), 1, cscratch_.data(), nullptr,
        static_cast<int>(nv3), 1, FFTW_ESTIMATE);
    inv_ = fftw_plan_many_dft_c2r(
        dim_x, n, static_cast<int>(nv3), cscratch_.data(), nullptr,
        static_cast<int>(nv3), 1, rscratch_.data(), nullptr,
        static_cast<int>(nv3), 1, FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("fft: plan creation failed");
  }
  ~XBatchFft() {
    std::lock_guard<std::mutex> lk(fftw_plan_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  XBatchFft(const XBatchFft&) = delete;
  XBatchFft& operator=(const XBatchFft&) = delete;

  // Number of retained modes along the last (halved) spatial axis.
  int nk_last() const { return nx_ / 2 + 1; }
  std::size_t x_modes() const {
    std::size_t m = nk_last();
    for (int d = 0; d < dim_x_ - 1; ++d) m *= static_cast<std::size_t>(nx_);
    return m;
  }
  std::size_t real_count() const {
    std::size_t m = 1;
    for (int d = 0; d < dim_x_; ++d) m *= static_cast<std::size_t>(nx_);
    return m * nv3_;
  }
  std::size_t cplx_count() const { return x_modes() * nv3_; }

  void forward(double* in, fftw_complex* out) const {
    fftw_execute_dft_r2c(fwd_, in, out);
  }
  void inverse(fftw_complex* in, double* out) const {
    fftw_execute_dft_c2r(inv_, in, out);
    double s = 1.0;
    for (int d = 0; d < dim_x_; ++d) s *= static_cast<double>(nx_);
    s = 1.0 / s;
    const std::size_t n = real_count();
    for (std::size_t i = 0; i < n; ++i) out[i] *= s;
  }

 private:
  int dim_x_, nx_;
  std::size_t nv3_;
  RealBuf rscratch_;
  CplxBuf cscratch_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

// Zero-pad an nv^3 block into the low corner of a (2nv)^3 buffer.  The
// caller must have zeroed `padded` (or rely on pad_into overwriting the
// corner and zeroing the rest, which it does).
inline void pad_into(int nv, const double* f, double* padded) {
  const int P = 2 * nv;
  const std::size_t np = static_cast<std::size_t>(P) * P * P;
  std::memset(padded, 0, sizeof(double) * np);
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      const double* src = f + (static_cast<std::size_t>(a) * nv + b) * nv;
      double* dst = padded + (static_cast<std::size_t>(a) * P + b) * P;
      std::memcpy(dst, src, sizeof(double) * nv);
    }
}

// Copy the low corner [0,nv)^3 out of a (2nv)^3 buffer.
inline void restrict_from(int nv, const double* padded, double* out) {
  const int P = 2 * nv;
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      const double* src = padded + (static_cast<std::size_t>(a) * P + b) * P;
      double* dst = out + (static_cast<std::size_t>(a) * nv + b) * nv;
      std::memcpy(dst, src, sizeof(double) * nv);
    }
}

}  // namespace landau
