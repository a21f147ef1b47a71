#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfa/ingest.hpp"

namespace mfa {

/// How the analysed profile is built from the input series.
enum class ProfileMode {
  Cumulative,  ///< profile = running sum of the series (returns -> log-price path)
  Raw,         ///< series is already a profile (e.g. raw prices)
};

struct AnalysisConfig {
  std::vector<double> q_grid;
  std::vector<std::size_t> scale_grid;
  int detrend_order = 1;
  ProfileMode profile_mode = ProfileMode::Cumulative;

  /// q in [-5, 5] step 0.25, scales 30 log-uniform integers in [20, 316].
  static AnalysisConfig defaults(int detrend_order = 1);
};

/// Orders q_min, q_min + step, ..., q_max. Points are built as q_min + i*step
/// and snapped to exact zero when within 1e-9 of it.
std::vector<double> make_q_grid(double q_min, double q_max, double step);

/// `count` log-uniform points on [s_min, s_max], rounded, deduplicated.
std::vector<std::size_t> make_scale_grid(std::size_t s_min, std::size_t s_max, std::size_t count);

/// Throws InvalidConfig unless: q strictly increasing and containing 0 and 2;
/// every s in [order + 2, floor(n / 4)]; order in {1, 2}.
void validate(const AnalysisConfig& cfg, std::size_t n);

struct Profile {
  std::vector<double> values;
  std::size_t size() const noexcept { return values.size(); }
};

/// values[t] = sum_{i <= t} r[i].
Profile make_profile(std::span<const double> increments);
Profile make_profile(const ReturnSeries& returns);

/// A length-s box starting at `start`.
struct Window {
  std::size_t start;
  std::size_t length;
  friend bool operator==(const Window&, const Window&) = default;
};

/// Forward boxes from t = 0, plus (when s does not divide n) the same number of
/// boxes laid from the end, listed in ascending start order.
std::vector<Window> partition_segments(std::size_t n, std::size_t s);

/// Least-squares polynomial detrending of one box. An orthonormal basis for
/// degree <= order over abscissa 1..s is built once (Gram-Schmidt on a
/// centred, scaled abscissa) and reused for every box of that size.
class PolynomialDetrender {
 public:
  PolynomialDetrender(std::size_t box_size, int order);

  std::size_t box_size() const noexcept { return size_; }
  int order() const noexcept { return order_; }

  void residuals(std::span<const double> values, std::span<double> out) const;
  /// Mean square of the residuals, without materializing them.
  double mean_square_residual(std::span<const double> values) const;

 private:
  std::size_t size_;
  int order_;
  std::vector<double> basis_;  // (order + 1) rows of length size_
};

std::vector<double> detrend_segment(std::span<const double> values, int order);

/// sqrt(mean(residual^2)).
double local_fluctuation(std::span<const double> residuals);

struct OverallFluctuation {
  double value = 0.0;
  std::size_t excluded = 0;
};

/// Generalized mean of order q of the local fluctuations; geometric mean at
/// q = 0. Boxes with F_v < floor (or F_v == 0) are dropped and counted.
/// Throws AllBoxesDegenerate if nothing remains.
OverallFluctuation overall_fluctuation(std::span<const double> locals, double q,
                                       double floor = 0.0);

struct FluctuationSurface {
  std::vector<double> q_grid;
  std::vector<std::size_t> scale_grid;
  int detrend_order = 1;
  /// Row-major [q][s].
  std::vector<double> values;
  std::vector<std::size_t> excluded;
  std::vector<std::size_t> box_counts;  // per scale

  double at(std::size_t qi, std::size_t si) const { return values[qi * scale_grid.size() + si]; }
  std::size_t excluded_at(std::size_t qi, std::size_t si) const {
    return excluded[qi * scale_grid.size() + si];
  }
};

/// Boxes below 1e-12 * std(profile) count as degenerate.
inline constexpr double kDegenerateBoxFloor = 1e-12;

FluctuationSurface fluctuation_surface(const Profile& profile, const AnalysisConfig& cfg);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
};

/// OLS of y on x with slope standard error and R^2. Needs >= 3 points.
ScalingFit fit_line(std::span<const double> x, std::span<const double> y);

/// Per-q fit of ln F_q(s) on ln s.
std::vector<ScalingFit> hurst_spectrum(const FluctuationSurface& surface);

/// tau(q) = q H(q) - 1.
std::vector<double> mass_exponents(std::span<const double> q_grid, std::span<const double> hurst);

struct SingularitySpectrum {
  std::vector<double> alpha;
  std::vector<double> f;
  double delta_alpha = 0.0;  ///< alpha(q_min) - alpha(q_max); may be negative
  double delta_f = 0.0;      ///< 1 - (f(q_min) + f(q_max)) / 2
};

/// alpha = d tau / dq from 3-point Lagrange stencils (central inside,
/// one-sided at the ends; exact for quadratic tau),
/// f = q alpha - tau.
SingularitySpectrum singularity_spectrum(std::span<const double> q_grid,
                                         std::span<const double> tau);

struct MultifractalSpectrum {
  std::vector<double> q_grid;
  std::vector<double> hurst;
  std::vector<double> hurst_stderr;
  std::vector<double> hurst_r2;
  std::vector<double> tau;
  std::vector<double> alpha;
  std::vector<double> f;
  double delta_alpha = 0.0;
  double delta_f = 0.0;

  /// Index of q on the grid; throws InvalidConfig if absent.
  std::size_t index_of(double q) const;
  double hurst_at(double q) const { return hurst[index_of(q)]; }
};

MultifractalSpectrum spectrum_from_surface(const FluctuationSurface& surface);

/// Profile -> surface -> spectrum, for callers that do not need the surface.
MultifractalSpectrum analyze_series(std::span<const double> series, const AnalysisConfig& cfg);

}  // namespace mfa
