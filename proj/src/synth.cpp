#include "mfa/synth.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "mfa/errors.hpp"
#include "mfa/fft.hpp"
#include "mfa/rng.hpp"

namespace mfa {

std::vector<double> binomial_cascade(const CascadeSpec& spec) {
  if (!(spec.p > 0.0 && spec.p <= 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "cascade weight p must lie in (0, 0.5]");
  }
  if (spec.levels < 1 || spec.levels > 30) {
    throw Error(ErrorCode::InvalidConfig, "cascade levels must lie in [1, 30]");
  }
  std::optional<Rng> rng;
  if (spec.shuffle_seed) rng.emplace(*spec.shuffle_seed);

  std::vector<double> mass{1.0};
  for (int level = 0; level < spec.levels; ++level) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const bool swap = rng && (rng->next_u64() >> 63) != 0;
      const double left = swap ? 1.0 - spec.p : spec.p;
      next[2 * i] = mass[i] * left;
      next[2 * i + 1] = mass[i] * (1.0 - left);
    }
    mass.swap(next);
  }
  return mass;
}

double cascade_analytic_hq(double p, double q) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidConfig, "p must lie in (0, 1)");
  if (q == 0.0) return -(std::log2(p) + std::log2(1.0 - p)) / 2.0;
  return 1.0 / q - std::log2(std::pow(p, q) + std::pow(1.0 - p, q)) / q;
}

double fgn_autocovariance(double hurst, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kk = static_cast<double>(k);
  if (k == 0) return 1.0;
  return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) + std::pow(kk - 1.0, h2));
}

std::vector<double> fgn(const FbmSpec& spec) {
  if (!(spec.hurst > 0.0 && spec.hurst < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "Hurst exponent must lie in (0, 1)");
  }
  if (spec.n < 2 || (spec.n & (spec.n - 1)) != 0) {
    throw Error(ErrorCode::InvalidConfig, "fBm length must be a power of two >= 2");
  }
  const std::size_t n = spec.n;

  // Circulant embedding of the n x n Toeplitz covariance.
  std::size_t m = 2 * n;
  std::vector<std::complex<double>> eig;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 6) {
      throw Error(ErrorCode::EmbeddingFailure,
                  "circulant embedding has negative eigenvalues for H=" + std::to_string(spec.hurst));
    }
    eig.assign(m, {});
    for (std::size_t k = 0; k < m; ++k) eig[k] = fgn_autocovariance(spec.hurst, std::min(k, m - k));
    ComplexFft(m).forward(eig);
    double peak = 0.0, lowest = 0.0;
    for (const auto& e : eig) {
      peak = std::max(peak, e.real());
      lowest = std::min(lowest, e.real());
    }
    if (lowest >= -1e-10 * peak) break;
    m *= 2;
  }

  Rng rng(spec.seed);
  const double dm = static_cast<double>(m);
  std::vector<std::complex<double>> w(m);
  const auto lambda = [&](std::size_t k) { return std::max(0.0, eig[k].real()); };
  w[0] = std::sqrt(lambda(0) / dm) * rng.normal();
  w[m / 2] = std::sqrt(lambda(m / 2) / dm) * rng.normal();
  for (std::size_t k = 1; k < m / 2; ++k) {
    const double scale = std::sqrt(lambda(k) / (2.0 * dm));
    const double re = rng.normal();
    const double im = rng.normal();
    w[k] = scale * std::complex<double>(re, im);
    w[m - k] = std::conj(w[k]);
  }
  ComplexFft(m).forward(w);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = w[t].real();
  return out;
}

std::vector<double> fbm(const FbmSpec& spec) {
  std::vector<double> path = fgn(spec);
  std::partial_sum(path.begin(), path.end(), path.begin());
  return path;
}

std::vector<double> gaussian_white_noise(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "white noise length must be >= 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = rng.normal();
  return out;
}

}  // namespace mfa
