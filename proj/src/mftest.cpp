#include "mfa/mftest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments sample_moments(std::span<const double> v) {
  Moments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / (n - 1.0));
  }
  return m;
}

double ratio_or_inf(double num, double den) {
  if (den > 0.0) return num / den;
  if (num == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::copysign(std::numeric_limits<double>::infinity(), num);
}

double two_sided_t_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

}  // namespace

QuadFit quadratic_tau_fit(std::span<const double> q_grid, std::span<const double> tau) {
  const std::size_t n = q_grid.size();
  if (tau.size() != n) throw Error(ErrorCode::GridMismatch, "tau and q sizes differ");
  if (n < 4) throw Error(ErrorCode::GridTooSmall, std::to_string(n) + " points, need >= 4");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = q_grid[i];
    design(r, 2) = q_grid[i] * q_grid[i];
    y(r) = tau[i];
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd upper = qr.matrixQR().topRows(3).triangularView<Eigen::Upper>();
  const double scale = upper.diagonal().cwiseAbs().maxCoeff();
  if (upper.diagonal().cwiseAbs().minCoeff() <= 1e-12 * scale) {
    throw Error(ErrorCode::RankDeficient, "design matrix [1, q, q^2] is collinear");
  }
  const Eigen::Vector3d beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;

  QuadFit fit;
  fit.dof = n - 3;
  const double dof = static_cast<double>(fit.dof);
  const double sse = resid.squaredNorm();
  const double mean_y = y.mean();
  const double sst = (y.array() - mean_y).square().sum();
  const double sigma2 = sse / dof;

  // (X'X)^-1 = R^-1 R^-T
  const Eigen::Matrix3d r_inv =
      upper.triangularView<Eigen::Upper>().solve(Eigen::Matrix3d::Identity());
  const Eigen::Matrix3d cov_unscaled = r_inv * r_inv.transpose();

  for (int k = 0; k < 3; ++k) {
    fit.coef[k] = beta(k);
    fit.std_error[k] = std::sqrt(sigma2 * cov_unscaled(k, k));
    fit.t_stat[k] = ratio_or_inf(fit.coef[k], fit.std_error[k]);
    fit.p_value[k] = two_sided_t_p(fit.t_stat[k], dof);
  }
  fit.r_squared = sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 1.0;
  const double ssr = sst - sse;
  fit.f_stat = ratio_or_inf(ssr / 2.0, sigma2);
  if (std::isnan(fit.f_stat)) {
    fit.f_p_value = 1.0;
  } else if (std::isinf(fit.f_stat)) {
    fit.f_p_value = 0.0;
  } else {
    const boost::math::fisher_f dist(2.0, dof);
    fit.f_p_value = boost::math::cdf(boost::math::complement(dist, std::max(0.0, fit.f_stat)));
  }
  return fit;
}

EnsembleStats ensemble_statistics(std::span<const MultifractalSpectrum> spectra) {
  if (spectra.size() < 2) {
    throw Error(ErrorCode::InvalidConfig, "ensemble statistics need at least two spectra");
  }
  const auto& grid = spectra.front().q_grid;
  for (const auto& s : spectra) {
    if (s.q_grid != grid) throw Error(ErrorCode::GridMismatch, "spectra on different q grids");
  }
  const std::size_t nq = grid.size();
  EnsembleStats st;
  st.q_grid = grid;
  std::vector<double> column(spectra.size());
  const auto per_q = [&](auto member, std::vector<double>& mean, std::vector<double>& sd) {
    mean.resize(nq);
    sd.resize(nq);
    for (std::size_t qi = 0; qi < nq; ++qi) {
      for (std::size_t i = 0; i < spectra.size(); ++i) column[i] = (spectra[i].*member)[qi];
      const Moments m = sample_moments(column);
      mean[qi] = m.mean;
      sd[qi] = m.std;
    }
  };
  per_q(&MultifractalSpectrum::hurst, st.hurst_mean, st.hurst_std);
  per_q(&MultifractalSpectrum::tau, st.tau_mean, st.tau_std);
  per_q(&MultifractalSpectrum::alpha, st.alpha_mean, st.alpha_std);
  per_q(&MultifractalSpectrum::f, st.f_mean, st.f_std);

  for (const auto& s : spectra) {
    st.delta_alpha_samples.push_back(s.delta_alpha);
    st.delta_f_samples.push_back(s.delta_f);
  }
  const Moments da = sample_moments(st.delta_alpha_samples);
  const Moments df = sample_moments(st.delta_f_samples);
  st.delta_alpha_mean = da.mean;
  st.delta_alpha_std = da.std;
  st.delta_f_mean = df.mean;
  st.delta_f_std = df.std;
  return st;
}

ExceedanceTest exceedance_test(double observed, std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::InvalidConfig, "empty surrogate sample");
  ExceedanceTest t;
  t.observed = observed;
  t.sample_size = samples.size();
  t.exceed_count = static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [&](double v) { return v > observed; }));
  t.p_value = static_cast<double>(t.exceed_count) / static_cast<double>(t.sample_size);
  const Moments m = sample_moments(samples);
  t.sample_mean = m.mean;
  t.sample_std = m.std;
  return t;
}

ExceedanceTest width_test(double delta_alpha, const EnsembleStats& ensemble) {
  return exceedance_test(delta_alpha, ensemble.delta_alpha_samples);
}

ExceedanceTest spectrum_difference_test(double delta_f, const EnsembleStats& ensemble) {
  return exceedance_test(delta_f, ensemble.delta_f_samples);
}

ShapeFlags shape_diagnostics(const MultifractalSpectrum& spectrum, double tol) {
  ShapeFlags flags;
  flags.hurst_monotone = true;
  for (std::size_t i = 1; i < spectrum.hurst.size(); ++i) {
    if (spectrum.hurst[i] > spectrum.hurst[i - 1] + tol) flags.hurst_monotone = false;
  }
  bool falls = false, rises = false;
  for (std::size_t i = 1; i < spectrum.alpha.size(); ++i) {
    const double d = spectrum.alpha[i] - spectrum.alpha[i - 1];
    if (d > tol) rises = true;
    if (d < -tol) falls = true;
  }
  flags.bell_shaped = !rises;
  flags.knot = rises && falls;
  return flags;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::IntrinsicMultifractality: return "intrinsic multifractality";
    case Verdict::ApparentOnly: return "apparent only";
    case Verdict::None: return "none";
  }
  return "none";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  for (Verdict v : {Verdict::IntrinsicMultifractality, Verdict::ApparentOnly, Verdict::None}) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

Verdict decide_verdict(const ShapeFlags& shape, const QuadFit& quad, const ExceedanceTest& width,
                       double significance) {
  const bool apparent = shape.hurst_monotone && shape.bell_shaped && quad.coef[2] < 0.0 &&
                        quad.p_value[2] < significance;
  if (!apparent) return Verdict::None;
  return width.p_value < significance ? Verdict::IntrinsicMultifractality : Verdict::ApparentOnly;
}

TestReport build_report(const MultifractalSpectrum& original, const EnsembleStats& ensemble,
                        double significance, std::string label, int detrend_order) {
  if (original.q_grid != ensemble.q_grid) {
    throw Error(ErrorCode::GridMismatch, "original and surrogate spectra on different q grids");
  }
  if (!(significance > 0.0 && significance < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "significance level must lie in (0, 1)");
  }
  TestReport r;
  r.label = std::move(label);
  r.detrend_order = detrend_order;
  r.significance = significance;
  r.q_grid = original.q_grid;

  const std::size_t i2 = original.index_of(2.0);
  r.hurst2 = original.hurst[i2];
  r.hurst2_surrogate_mean = ensemble.hurst_mean[i2];
  r.hurst2_surrogate_std = ensemble.hurst_std[i2];
  const double gap = std::abs(r.hurst2 - r.hurst2_surrogate_mean);
  r.hurst2_within_1sigma = gap <= r.hurst2_surrogate_std;
  r.hurst2_within_3sigma = gap <= 3.0 * r.hurst2_surrogate_std;

  r.quad = quadratic_tau_fit(original.q_grid, original.tau);
  r.width = width_test(original.delta_alpha, ensemble);
  r.spectrum_difference = spectrum_difference_test(original.delta_f, ensemble);
  r.shape = shape_diagnostics(original);
  r.nonlinear_tau = r.quad.p_value[2] < significance;
  r.concave_tau = r.quad.coef[2] < 0.0;
  r.verdict = decide_verdict(r.shape, r.quad, r.width, significance);
  return r;
}

}  // namespace mfa
