#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mfa/mfdfa.hpp"

namespace mfa {

/// OLS fit tau(q) = a0 + a1 q + a2 q^2 with classical homoskedastic errors.
/// The grid points are serially dependent, so the t and F p-values are
/// descriptive rather than exact.
struct QuadFit {
  std::array<double, 3> coef{};
  std::array<double, 3> std_error{};
  std::array<double, 3> t_stat{};
  std::array<double, 3> p_value{};
  double f_stat = 0.0;
  double f_p_value = 0.0;
  double r_squared = 0.0;
  std::size_t dof = 0;  ///< n - 3
};

/// Householder QR solve. Throws GridTooSmall (n < 4) or RankDeficient.
QuadFit quadratic_tau_fit(std::span<const double> q_grid, std::span<const double> tau);

/// Per-q sample mean and (n-1) standard deviation over an ensemble of spectra.
struct EnsembleStats {
  std::vector<double> q_grid;
  std::vector<double> hurst_mean, hurst_std;
  std::vector<double> tau_mean, tau_std;
  std::vector<double> alpha_mean, alpha_std;
  std::vector<double> f_mean, f_std;
  std::vector<double> delta_alpha_samples;
  std::vector<double> delta_f_samples;
  double delta_alpha_mean = 0.0, delta_alpha_std = 0.0;
  double delta_f_mean = 0.0, delta_f_std = 0.0;

  std::size_t size() const noexcept { return delta_alpha_samples.size(); }
};

/// Throws InvalidConfig for fewer than two spectra, GridMismatch when q grids
/// differ.
EnsembleStats ensemble_statistics(std::span<const MultifractalSpectrum> spectra);

/// Empirical exceedance test: p = #{sample > observed} / N. Ties do not count.
struct ExceedanceTest {
  double observed = 0.0;
  double sample_mean = 0.0;
  double sample_std = 0.0;
  std::size_t exceed_count = 0;
  std::size_t sample_size = 0;
  double p_value = 1.0;
};

ExceedanceTest exceedance_test(double observed, std::span<const double> samples);
/// Singularity width against the surrogates' widths.
ExceedanceTest width_test(double delta_alpha, const EnsembleStats& ensemble);
/// Spectrum difference against the surrogates'. Corroborating evidence only.
ExceedanceTest spectrum_difference_test(double delta_f, const EnsembleStats& ensemble);

struct ShapeFlags {
  bool hurst_monotone = false;  ///< H non-increasing in q within tolerance
  bool bell_shaped = false;     ///< alpha non-increasing in q (flat counts)
  bool knot = false;            ///< alpha increments change sign
};

inline constexpr double kMonotoneTolerance = 1e-6;

/// The "bell-shaped" flag formalizes the shape check as monotonicity of
/// alpha(q); the knot flag is set when alpha turns back on itself.
ShapeFlags shape_diagnostics(const MultifractalSpectrum& spectrum, double tol = kMonotoneTolerance);

enum class Verdict { IntrinsicMultifractality, ApparentOnly, None };
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

/// A comparison row computed elsewhere (e.g. another estimator's
/// results), carried through to the report verbatim. Never computed here.
struct ExternalRow {
  std::string method;
  bool hurst_monotone = false;
  bool bell_shaped = false;
  bool nonlinear_tau = false;
  bool concave_tau = false;
  double width_p_value = 0.0;
  double spectrum_difference_p_value = 0.0;
};

struct TestReport {
  std::string label;
  int detrend_order = 1;
  double significance = 0.05;
  std::vector<double> q_grid;

  double hurst2 = 0.0;
  double hurst2_surrogate_mean = 0.0;
  double hurst2_surrogate_std = 0.0;
  bool hurst2_within_1sigma = false;
  bool hurst2_within_3sigma = false;

  QuadFit quad;
  ExceedanceTest width;
  ExceedanceTest spectrum_difference;
  ShapeFlags shape;

  bool nonlinear_tau = false;  ///< a2 != 0 at the significance level
  bool concave_tau = false;    ///< a2 < 0
  Verdict verdict = Verdict::None;

  std::vector<ExternalRow> external_rows;
};

/// intrinsic iff H monotone, bell-shaped, a2 < 0 with p < level and width-test
/// p < level; apparent-only when all but the width test hold; otherwise none.
/// The spectrum-difference test never changes the verdict.
Verdict decide_verdict(const ShapeFlags& shape, const QuadFit& quad, const ExceedanceTest& width,
                       double significance);

/// Assemble every test for one analysed series against its surrogate ensemble.
TestReport build_report(const MultifractalSpectrum& original, const EnsembleStats& ensemble,
                        double significance = 0.05, std::string label = {}, int detrend_order = 1);

}  // namespace mfa
