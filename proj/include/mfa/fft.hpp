#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace mfa {

/// Real-to-complex / complex-to-real DFT of a fixed length, backed by FFTW.
/// Each instance owns its plans and buffers; instances may be used from
/// different threads concurrently (plan creation is serialized internally).
/// The inverse is unnormalized, matching FFTW.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// Writes bins() coefficients.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  /// Reads bins() coefficients, writes size() samples scaled by size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Complex in-place DFT (sign -1 forward), used by the fBm generator.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<std::complex<double>> data);

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mfa
