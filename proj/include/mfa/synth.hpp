#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mfa {

struct CascadeSpec {
  int levels = 16;
  double p = 0.3;
  /// When set, the left/right weight order is drawn at random at every split
  /// (same multifractal spectrum, no fixed spatial ordering).
  std::optional<std::uint64_t> shuffle_seed;
};

/// Deterministic binomial multiplicative cascade: 2^levels cell masses that
/// sum to 1. Each split gives fraction p to the left child.
std::vector<double> binomial_cascade(const CascadeSpec& spec);

/// Generalized Hurst exponent of the binomial cascade measure under
/// fluctuation analysis of its cumulative sum:
///   H(q) = 1/q - log2(p^q + (1-p)^q) / q,
/// with the q -> 0 limit -(log2 p + log2(1-p)) / 2.
double cascade_analytic_hq(double p, double q);

struct FbmSpec {
  std::size_t n = 1 << 14;
  double hurst = 0.5;
  std::uint64_t seed = 0;
};

/// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, std::size_t k);

/// Exact-covariance fractional Gaussian noise by circulant embedding
/// (Davies-Harte). The embedding is doubled until its spectrum is
/// non-negative; throws EmbeddingFailure if that never happens.
std::vector<double> fgn(const FbmSpec& spec);

/// Fractional Brownian motion path: running sum of fgn(spec).
std::vector<double> fbm(const FbmSpec& spec);

std::vector<double> gaussian_white_noise(std::size_t n, std::uint64_t seed);

}  // namespace mfa
