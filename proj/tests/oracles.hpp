#pragma once
// Test-only reference computations. Each takes a different route from the
// library code it checks: direct pow sums instead of log-space means, O(n^2)
// DFT instead of FFTW, normal equations instead of QR, cell partition sums
// instead of the closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline double power_mean(std::span<const double> v, double q) {
  const double n = static_cast<double>(v.size());
  if (q == 0.0) {
    double s = 0.0;
    for (double x : v) s += std::log(x);
    return std::exp(s / n);
  }
  double s = 0.0;
  for (double x : v) s += std::pow(x, q);
  return std::pow(s / n, 1.0 / q);
}

inline std::vector<double> dft_amplitudes(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> amp(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    amp[k] = std::abs(acc);
  }
  return amp;
}

inline double dft_residual(std::span<const double> x, std::span<const double> reference) {
  const auto a = dft_amplitudes(x);
  const auto b = dft_amplitudes(reference);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

struct NormalEquationsFit {
  double coef[3];
  double t_stat[3];
  double f_stat;
  double r_squared;
};

// Solves (X'X) b = X'y for X = [1, q, q^2] by Gauss-Jordan elimination with
// partial pivoting; covariance from the explicit inverse. Forming X'X squares
// the condition number, so the sums are carried in long double.
inline NormalEquationsFit quadratic_normal_equations(std::span<const double> q, std::span<const double> y) {
  const std::size_t n = q.size();
  long double xtx[3][3] = {};
  long double xty[3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const long double qi = q[i];
    const long double row[3] = {1.0L, qi, qi * qi};
    for (int a = 0; a < 3; ++a) {
      xty[a] += row[a] * y[i];
      for (int b = 0; b < 3; ++b) xtx[a][b] += row[a] * row[b];
    }
  }
  // Invert xtx via Gauss-Jordan on [A | I].
  long double aug[3][6];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      aug[r][c] = xtx[r][c];
      aug[r][c + 3] = r == c ? 1.0L : 0.0L;
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
    }
    for (int c = 0; c < 6; ++c) std::swap(aug[col][c], aug[piv][c]);
    const long double d = aug[col][col];
    for (int c = 0; c < 6; ++c) aug[col][c] /= d;
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const long double f = aug[r][col];
      for (int c = 0; c < 6; ++c) aug[r][c] -= f * aug[col][c];
    }
  }
  NormalEquationsFit fit{};
  long double coef[3];
  for (int a = 0; a < 3; ++a) {
    coef[a] = 0.0L;
    for (int b = 0; b < 3; ++b) coef[a] += aug[a][b + 3] * xty[b];
  }
  long double mean = 0.0L;
  for (double v : y) mean += v;
  mean /= static_cast<long double>(n);
  long double sse = 0.0L, sst = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const long double qi = q[i];
    const long double pred = coef[0] + coef[1] * qi + coef[2] * qi * qi;
    sse += (y[i] - pred) * (y[i] - pred);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  const long double sigma2 = sse / static_cast<long double>(n - 3);
  for (int a = 0; a < 3; ++a) {
    fit.coef[a] = static_cast<double>(coef[a]);
    fit.t_stat[a] = static_cast<double>(coef[a] / std::sqrt(sigma2 * aug[a][a + 3]));
  }
  fit.f_stat = static_cast<double>(((sst - sse) / 2.0L) / sigma2);
  fit.r_squared = static_cast<double>(1.0L - sse / sst);
  return fit;
}

// Partition-function exponent of a dyadic measure: aggregate cell masses
// to level j and k = j + 1 and take the log2 ratio. For a binomial cascade
// the ratio is exactly (p^q + (1-p)^q) at every level.
inline double cascade_hq_from_partition(std::span<const double> cells, int coarse_level, double q) {
  const auto partition_sum = [&](int level) {
    const std::size_t boxes = std::size_t{1} << level;
    const std::size_t width = cells.size() / boxes;
    double z = 0.0;
    for (std::size_t b = 0; b < boxes; ++b) {
      double m = 0.0;
      for (std::size_t i = 0; i < width; ++i) m += cells[b * width + i];
      z += std::pow(m, q);
    }
    return z;
  };
  // Z(eps) ~ eps^tau with eps = 2^-level; tau = -log2(Z_{j+1} / Z_j).
  const double tau = -std::log2(partition_sum(coarse_level + 1) / partition_sum(coarse_level));
  return (1.0 + tau) / q;
}

inline double lag_autocorrelation(std::span<const double> x, std::size_t lag) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double c0 = 0.0, ck = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) c0 += (x[t] - mean) * (x[t] - mean);
  for (std::size_t t = 0; t + lag < x.size(); ++t) ck += (x[t] - mean) * (x[t + lag] - mean);
  return ck / c0;
}

}  // namespace oracle
