#include "mfa/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "mfa/errors.hpp"
#include "mfa/fft.hpp"
#include "mfa/rng.hpp"

namespace mfa {

namespace {

using Spectrum = std::vector<std::complex<double>>;

// Bin weight so that sums over the half spectrum equal sums over the full DFT.
double bin_weight(std::size_t k, std::size_t n) {
  return (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
}

double residual_against(const Spectrum& spec, const std::vector<double>& target_amp, std::size_t n) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double w = bin_weight(k, n);
    const double d = std::abs(spec[k]) - target_amp[k];
    num += w * d * d;
    den += w * target_amp[k] * target_amp[k];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

double amplitude_spectrum_residual(std::span<const double> x, std::span<const double> reference) {
  if (x.size() != reference.size() || x.empty()) {
    throw Error(ErrorCode::GridMismatch, "series lengths differ");
  }
  RealFft fft(x.size());
  Spectrum sx(fft.bins()), sr(fft.bins());
  fft.forward(x, sx);
  fft.forward(reference, sr);
  std::vector<double> amp(sr.size());
  for (std::size_t k = 0; k < sr.size(); ++k) amp[k] = std::abs(sr[k]);
  return residual_against(sx, amp, x.size());
}

IaaftResult iaaft(std::span<const double> x, const IaaftConfig& cfg) {
  const std::size_t n = x.size();
  if (n < 8) throw Error(ErrorCode::LengthTooShort, std::to_string(n) + " samples, need >= 8");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    throw Error(ErrorCode::ConstantSeries, "IAAFT of a constant series");
  }
  if (cfg.max_iterations < 1 || !(cfg.spectrum_tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "IAAFT needs max_iterations >= 1 and tolerance > 0");
  }

  RealFft fft(n);
  const std::size_t bins = fft.bins();
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());

  Spectrum spec(bins);
  fft.forward(x, spec);
  std::vector<double> target_amp(bins);
  for (std::size_t k = 0; k < bins; ++k) target_amp[k] = std::abs(spec[k]);

  IaaftResult result;
  result.values.assign(x.begin(), x.end());
  Rng rng(cfg.rng_seed);
  rng.shuffle(std::span<double>(result.values));

  std::vector<double> adjusted(n);
  std::vector<std::size_t> order(n), previous_order;
  const double inv_n = 1.0 / static_cast<double>(n);
  fft.forward(result.values, spec);

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    // Impose the source amplitudes, keep the iterate's phases.
    for (std::size_t k = 0; k < bins; ++k) {
      const double mag = std::abs(spec[k]);
      spec[k] = mag > 0.0 ? spec[k] * (target_amp[k] / mag) : std::complex<double>(target_amp[k], 0.0);
    }
    fft.inverse(spec, adjusted);
    for (double& v : adjusted) v *= inv_n;

    // Impose the source values by rank.
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return adjusted[a] < adjusted[b] || (adjusted[a] == adjusted[b] && a < b);
    });
    for (std::size_t k = 0; k < n; ++k) result.values[order[k]] = sorted[k];

    fft.forward(result.values, spec);
    result.iterations = it;
    result.spectrum_residual = residual_against(spec, target_amp, n);
    if (result.spectrum_residual <= cfg.spectrum_tolerance) {
      result.stop = IaaftStop::SpectrumTolerance;
      return result;
    }
    if (order == previous_order) {
      result.stop = IaaftStop::RankFixedPoint;
      return result;
    }
    previous_order.swap(order);
    order.resize(n);
  }
  result.stop = IaaftStop::MaxIterations;
  return result;
}

std::size_t resolve_workers(std::size_t requested, std::size_t jobs) {
  std::size_t w = requested;
  if (w == 0) w = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, jobs));
}

SurrogateEnsemble make_ensemble(std::span<const double> x, const EnsembleOptions& opts,
                                std::string label) {
  if (opts.size < 1) throw Error(ErrorCode::InvalidConfig, "ensemble size must be >= 1");
  SurrogateEnsemble ens;
  ens.source_label = std::move(label);
  ens.base_seed = opts.base_seed;
  ens.surrogates.resize(opts.size);
  ens.seeds.resize(opts.size);
  ens.iterations.resize(opts.size);
  ens.residuals.resize(opts.size);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load() || (opts.cancel != nullptr && opts.cancel->load())) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= opts.size) return;
      try {
        IaaftConfig cfg;
        cfg.max_iterations = opts.max_iterations;
        cfg.spectrum_tolerance = opts.spectrum_tolerance;
        cfg.rng_seed = derive_seed(opts.base_seed, i);
        IaaftResult r = iaaft(x, cfg);
        ens.seeds[i] = cfg.rng_seed;
        ens.iterations[i] = r.iterations;
        ens.residuals[i] = r.spectrum_residual;
        ens.surrogates[i] = std::move(r.values);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const std::size_t workers = resolve_workers(opts.workers, opts.size);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  if (opts.cancel != nullptr && opts.cancel->load()) {
    throw Error(ErrorCode::Cancelled, "surrogate generation interrupted");
  }
  return ens;
}

void write_ensemble(const SurrogateEnsemble& ensemble, const std::filesystem::path& values_csv,
                    const std::filesystem::path& manifest_json) {
  {
    std::FILE* f = std::fopen(values_csv.string().c_str(), "w");
    if (f == nullptr) throw Error(ErrorCode::IoError, values_csv.string());
    std::fprintf(f, "surrogate,t,value\n");
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      const auto& s = ensemble.surrogates[i];
      for (std::size_t t = 0; t < s.size(); ++t) std::fprintf(f, "%zu,%zu,%.17g\n", i, t, s[t]);
    }
    std::fclose(f);
  }
  nlohmann::json manifest;
  manifest["source"] = ensemble.source_label;
  manifest["base_seed"] = ensemble.base_seed;
  manifest["size"] = ensemble.size();
  manifest["seeds"] = ensemble.seeds;
  manifest["iterations"] = ensemble.iterations;
  manifest["spectrum_residuals"] = ensemble.residuals;
  std::ofstream out(manifest_json);
  if (!out) throw Error(ErrorCode::IoError, manifest_json.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace mfa
