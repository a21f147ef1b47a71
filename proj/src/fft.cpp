#include "mfa/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace mfa {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(std::size_t n) {
    const std::size_t bins = n / 2 + 1;
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(bins);
    if (real == nullptr || spec == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    const int len = static_cast<int>(n);
    fwd = fftw_plan_dft_r2c_1d(len, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft: zero length");
  impl_ = std::make_unique<Impl>(n);
}
RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(n_), impl_->real);
  fftw_execute(impl_->fwd);
  std::memcpy(static_cast<void*>(out.data()), impl_->spec, bins() * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  // c2r destroys its input, so always work on the owned buffer.
  std::memcpy(impl_->spec, in.data(), bins() * sizeof(fftw_complex));
  fftw_execute(impl_->inv);
  std::copy(impl_->real, impl_->real + n_, out.begin());
}

struct ComplexFft::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;

  explicit Impl(std::size_t n) {
    buf = fftw_alloc_complex(n);
    if (buf == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (plan) fftw_destroy_plan(plan);
    fftw_free(buf);
  }
};

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("ComplexFft: zero length");
  impl_ = std::make_unique<Impl>(n);
}
ComplexFft::~ComplexFft() = default;

void ComplexFft::forward(std::span<std::complex<double>> data) {
  std::memcpy(impl_->buf, data.data(), n_ * sizeof(fftw_complex));
  fftw_execute(impl_->plan);
  std::memcpy(static_cast<void*>(data.data()), impl_->buf, n_ * sizeof(fftw_complex));
}

}  // namespace mfa
