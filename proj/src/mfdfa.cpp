#include "mfa/mfdfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool is_degenerate(double fv, double floor) { return fv == 0.0 || fv < floor; }

// Generalized mean from log-fluctuations, evaluated with a max shift so that
// q = +-5 on tiny or huge boxes neither underflows nor overflows.
double generalized_mean_from_logs(std::span<const double> log_fv, double q) {
  const double n = static_cast<double>(log_fv.size());
  if (q == 0.0) {
    return std::exp(std::accumulate(log_fv.begin(), log_fv.end(), 0.0) / n);
  }
  double peak = -std::numeric_limits<double>::infinity();
  for (double l : log_fv) peak = std::max(peak, q * l);
  double sum = 0.0;
  for (double l : log_fv) sum += std::exp(q * l - peak);
  return std::exp((peak + std::log(sum / n)) / q);
}

// Derivative at x[at] of the quadratic through three points.
double three_point_derivative(const double* x, const double* y, int at) {
  const double x0 = x[0], x1 = x[1], x2 = x[2];
  const double t = x[at];
  const double d0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
  const double d1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
  const double d2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
  return d0 * y[0] + d1 * y[1] + d2 * y[2];
}

}  // namespace

AnalysisConfig AnalysisConfig::defaults(int detrend_order) {
  AnalysisConfig cfg;
  cfg.q_grid = make_q_grid(-5.0, 5.0, 0.25);
  cfg.scale_grid = make_scale_grid(20, 316, 30);
  cfg.detrend_order = detrend_order;
  return cfg;
}

std::vector<double> make_q_grid(double q_min, double q_max, double step) {
  if (!(step > 0.0) || !(q_max > q_min)) {
    throw Error(ErrorCode::InvalidConfig, "q grid needs q_max > q_min and step > 0");
  }
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((q_max - q_min) / step + 1e-9)) + 1;
  grid.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double q = q_min + static_cast<double>(i) * step;
    if (std::abs(q) < 1e-9) q = 0.0;
    grid.push_back(q);
  }
  return grid;
}

std::vector<std::size_t> make_scale_grid(std::size_t s_min, std::size_t s_max, std::size_t count) {
  if (s_min < 1 || s_max < s_min || count < 1) {
    throw Error(ErrorCode::InvalidConfig, "scale grid needs 1 <= s_min <= s_max and count >= 1");
  }
  std::vector<std::size_t> grid;
  const double lo = std::log(static_cast<double>(s_min));
  const double hi = std::log(static_cast<double>(s_max));
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const auto s = static_cast<std::size_t>(std::llround(std::exp(lo + frac * (hi - lo))));
    if (grid.empty() || grid.back() != s) grid.push_back(s);
  }
  return grid;
}

void validate(const AnalysisConfig& cfg, std::size_t n) {
  if (cfg.detrend_order < 1 || cfg.detrend_order > 2) {
    throw Error(ErrorCode::InvalidConfig, "detrend order must be 1 or 2");
  }
  if (cfg.q_grid.size() < 3) throw Error(ErrorCode::InvalidConfig, "q grid needs >= 3 points");
  for (std::size_t i = 1; i < cfg.q_grid.size(); ++i) {
    if (!(cfg.q_grid[i] > cfg.q_grid[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "q grid must be strictly increasing");
    }
  }
  const auto has = [&](double q) {
    return std::any_of(cfg.q_grid.begin(), cfg.q_grid.end(), [q](double v) { return v == q; });
  };
  if (!has(0.0) || !has(2.0)) throw Error(ErrorCode::InvalidConfig, "q grid must contain 0 and 2");
  if (cfg.scale_grid.size() < 3) {
    throw Error(ErrorCode::InvalidConfig, "scale grid needs >= 3 points");
  }
  const std::size_t lo = static_cast<std::size_t>(cfg.detrend_order) + 2;
  const std::size_t hi = n / 4;
  for (std::size_t i = 0; i < cfg.scale_grid.size(); ++i) {
    const std::size_t s = cfg.scale_grid[i];
    if (i > 0 && s <= cfg.scale_grid[i - 1]) {
      throw Error(ErrorCode::InvalidConfig, "scale grid must be strictly increasing");
    }
    if (s < lo || s > hi) {
      std::ostringstream msg;
      msg << "scale " << s << " outside [" << lo << ", " << hi << "] for series length " << n;
      throw Error(ErrorCode::InvalidConfig, msg.str());
    }
  }
}

Profile make_profile(std::span<const double> increments) {
  if (increments.empty()) throw Error(ErrorCode::SeriesTooShort, "empty series");
  Profile p;
  p.values.resize(increments.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < increments.size(); ++t) {
    if (!std::isfinite(increments[t])) {
      throw Error(ErrorCode::DegenerateSeries, "non-finite value at index " + std::to_string(t));
    }
    acc += increments[t];
    p.values[t] = acc;
  }
  return p;
}

Profile make_profile(const ReturnSeries& returns) { return make_profile(returns.values); }

std::vector<Window> partition_segments(std::size_t n, std::size_t s) {
  if (s == 0 || s > n) {
    throw Error(ErrorCode::ScaleTooLarge,
                "box size " + std::to_string(s) + " for length " + std::to_string(n));
  }
  const std::size_t m = n / s;
  std::vector<Window> windows;
  windows.reserve(2 * m);
  for (std::size_t v = 0; v < m; ++v) windows.push_back({v * s, s});
  if (n % s != 0) {
    const std::size_t offset = n - m * s;
    for (std::size_t v = 0; v < m; ++v) windows.push_back({offset + v * s, s});
    std::ranges::sort(windows, {}, &Window::start);
  }
  return windows;
}

PolynomialDetrender::PolynomialDetrender(std::size_t box_size, int order)
    : size_(box_size), order_(order) {
  if (order < 0 || order > 2) throw Error(ErrorCode::InvalidConfig, "detrending order must be 0, 1 or 2");
  if (box_size < static_cast<std::size_t>(order) + 2) {
    throw Error(ErrorCode::Underdetermined, "box of " + std::to_string(box_size) +
                                                " points for order " + std::to_string(order));
  }
  const std::size_t rows = static_cast<std::size_t>(order) + 1;
  basis_.assign(rows * size_, 0.0);
  const double centre = (static_cast<double>(size_) + 1.0) / 2.0;
  const double half = static_cast<double>(size_) / 2.0;
  for (std::size_t k = 0; k < rows; ++k) {
    double* row = basis_.data() + k * size_;
    for (std::size_t j = 0; j < size_; ++j) {
      row[j] = std::pow((static_cast<double>(j + 1) - centre) / half, static_cast<double>(k));
    }
    // Modified Gram-Schmidt, two passes.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < k; ++p) {
        const double* prev = basis_.data() + p * size_;
        double dot = 0.0;
        for (std::size_t j = 0; j < size_; ++j) dot += row[j] * prev[j];
        for (std::size_t j = 0; j < size_; ++j) row[j] -= dot * prev[j];
      }
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < size_; ++j) norm += row[j] * row[j];
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < size_; ++j) row[j] /= norm;
  }
}

void PolynomialDetrender::residuals(std::span<const double> values, std::span<double> out) const {
  std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(size_), out.begin());
  const std::size_t rows = static_cast<std::size_t>(order_) + 1;
  for (std::size_t k = 0; k < rows; ++k) {
    const double* b = basis_.data() + k * size_;
    double c = 0.0;
    for (std::size_t j = 0; j < size_; ++j) c += values[j] * b[j];
    for (std::size_t j = 0; j < size_; ++j) out[j] -= c * b[j];
  }
}

double PolynomialDetrender::mean_square_residual(std::span<const double> values) const {
  const std::size_t rows = static_cast<std::size_t>(order_) + 1;
  double coeff[3] = {0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < rows; ++k) {
    const double* b = basis_.data() + k * size_;
    double c = 0.0;
    for (std::size_t j = 0; j < size_; ++j) c += values[j] * b[j];
    coeff[k] = c;
  }
  double ss = 0.0;
  for (std::size_t j = 0; j < size_; ++j) {
    double fit = 0.0;
    for (std::size_t k = 0; k < rows; ++k) fit += coeff[k] * basis_[k * size_ + j];
    const double r = values[j] - fit;
    ss += r * r;
  }
  return ss / static_cast<double>(size_);
}

std::vector<double> detrend_segment(std::span<const double> values, int order) {
  const PolynomialDetrender detrender(values.size(), order);
  std::vector<double> out(values.size());
  detrender.residuals(values, out);
  return out;
}

double local_fluctuation(std::span<const double> residuals) {
  if (residuals.empty()) return 0.0;
  double ss = 0.0;
  for (double r : residuals) ss += r * r;
  return std::sqrt(ss / static_cast<double>(residuals.size()));
}

OverallFluctuation overall_fluctuation(std::span<const double> locals, double q, double floor) {
  std::vector<double> logs;
  logs.reserve(locals.size());
  OverallFluctuation out;
  for (double fv : locals) {
    if (is_degenerate(fv, floor)) {
      ++out.excluded;
    } else {
      logs.push_back(std::log(fv));
    }
  }
  if (logs.empty()) {
    throw Error(ErrorCode::AllBoxesDegenerate, "every box below the fluctuation floor");
  }
  out.value = generalized_mean_from_logs(logs, q);
  return out;
}

FluctuationSurface fluctuation_surface(const Profile& profile, const AnalysisConfig& cfg) {
  validate(cfg, profile.size());
  const std::size_t nq = cfg.q_grid.size();
  const std::size_t ns = cfg.scale_grid.size();
  FluctuationSurface surface;
  surface.q_grid = cfg.q_grid;
  surface.scale_grid = cfg.scale_grid;
  surface.detrend_order = cfg.detrend_order;
  surface.values.assign(nq * ns, 0.0);
  surface.excluded.assign(nq * ns, 0);
  surface.box_counts.assign(ns, 0);

  const double floor = kDegenerateBoxFloor * stddev(profile.values);
  const std::span<const double> series(profile.values);
  std::vector<double> log_fv;
  for (std::size_t si = 0; si < ns; ++si) {
    const std::size_t s = cfg.scale_grid[si];
    const PolynomialDetrender detrender(s, cfg.detrend_order);
    const auto windows = partition_segments(profile.size(), s);
    surface.box_counts[si] = windows.size();
    log_fv.clear();
    std::size_t excluded = 0;
    for (const Window& w : windows) {
      const double fv = std::sqrt(detrender.mean_square_residual(series.subspan(w.start, w.length)));
      if (is_degenerate(fv, floor)) {
        ++excluded;
      } else {
        log_fv.push_back(std::log(fv));
      }
    }
    if (log_fv.empty()) {
      std::ostringstream msg;
      msg << "q=" << cfg.q_grid.front() << " s=" << s;
      throw Error(ErrorCode::AllBoxesDegenerate, msg.str());
    }
    for (std::size_t qi = 0; qi < nq; ++qi) {
      surface.values[qi * ns + si] = generalized_mean_from_logs(log_fv, cfg.q_grid[qi]);
      surface.excluded[qi * ns + si] = excluded;
    }
  }
  return surface;
}

ScalingFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 3 || y.size() != n) {
    throw Error(ErrorCode::InsufficientScales, std::to_string(n) + " points");
  }
  const double dn = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / dn;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / dn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InsufficientScales, "all abscissae equal");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    sse += r * r;
  }
  fit.stderr_slope = std::sqrt(sse / (dn - 2.0) / sxx);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::vector<ScalingFit> hurst_spectrum(const FluctuationSurface& surface) {
  const std::size_t ns = surface.scale_grid.size();
  std::vector<double> log_s(ns);
  for (std::size_t si = 0; si < ns; ++si) log_s[si] = std::log(static_cast<double>(surface.scale_grid[si]));
  std::vector<ScalingFit> fits;
  fits.reserve(surface.q_grid.size());
  std::vector<double> log_f(ns);
  for (std::size_t qi = 0; qi < surface.q_grid.size(); ++qi) {
    if (ns < 3) {
      throw Error(ErrorCode::InsufficientScales, "q=" + std::to_string(surface.q_grid[qi]));
    }
    for (std::size_t si = 0; si < ns; ++si) log_f[si] = std::log(surface.at(qi, si));
    fits.push_back(fit_line(log_s, log_f));
  }
  return fits;
}

std::vector<double> mass_exponents(std::span<const double> q_grid, std::span<const double> hurst) {
  if (q_grid.size() != hurst.size()) throw Error(ErrorCode::GridMismatch, "H and q sizes differ");
  std::vector<double> tau(q_grid.size());
  for (std::size_t i = 0; i < q_grid.size(); ++i) tau[i] = q_grid[i] * hurst[i] - 1.0;
  return tau;
}

SingularitySpectrum singularity_spectrum(std::span<const double> q_grid, std::span<const double> tau) {
  const std::size_t n = q_grid.size();
  if (n < 3) throw Error(ErrorCode::GridTooSmall, std::to_string(n) + " grid points");
  if (tau.size() != n) throw Error(ErrorCode::GridMismatch, "tau and q sizes differ");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(q_grid[i] > q_grid[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "q grid must be strictly increasing");
    }
  }
  SingularitySpectrum out;
  out.alpha.resize(n);
  out.f.resize(n);
  out.alpha[0] = three_point_derivative(&q_grid[0], &tau[0], 0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.alpha[i] = three_point_derivative(&q_grid[i - 1], &tau[i - 1], 1);
  }
  out.alpha[n - 1] = three_point_derivative(&q_grid[n - 3], &tau[n - 3], 2);
  for (std::size_t i = 0; i < n; ++i) out.f[i] = q_grid[i] * out.alpha[i] - tau[i];
  out.delta_alpha = out.alpha.front() - out.alpha.back();
  out.delta_f = 1.0 - (out.f.front() + out.f.back()) / 2.0;
  return out;
}

std::size_t MultifractalSpectrum::index_of(double q) const {
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (std::abs(q_grid[i] - q) < 1e-9) return i;
  }
  throw Error(ErrorCode::InvalidConfig, "q=" + std::to_string(q) + " not on grid");
}

MultifractalSpectrum spectrum_from_surface(const FluctuationSurface& surface) {
  MultifractalSpectrum spec;
  spec.q_grid = surface.q_grid;
  for (const ScalingFit& fit : hurst_spectrum(surface)) {
    spec.hurst.push_back(fit.slope);
    spec.hurst_stderr.push_back(fit.stderr_slope);
    spec.hurst_r2.push_back(fit.r_squared);
  }
  spec.tau = mass_exponents(spec.q_grid, spec.hurst);
  auto sing = singularity_spectrum(spec.q_grid, spec.tau);
  spec.alpha = std::move(sing.alpha);
  spec.f = std::move(sing.f);
  spec.delta_alpha = sing.delta_alpha;
  spec.delta_f = sing.delta_f;
  return spec;
}

MultifractalSpectrum analyze_series(std::span<const double> series, const AnalysisConfig& cfg) {
  Profile profile;
  if (cfg.profile_mode == ProfileMode::Cumulative) {
    profile = make_profile(series);
  } else {
    profile.values.assign(series.begin(), series.end());
  }
  return spectrum_from_surface(fluctuation_surface(profile, cfg));
}

}  // namespace mfa
