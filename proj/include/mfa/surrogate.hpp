#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mfa {

struct IaaftConfig {
  std::size_t max_iterations = 1000;
  /// Stop once ||A_iterate - A_source|| / ||A_source|| falls to this value
  /// (A = DFT amplitude moduli).
  double spectrum_tolerance = 1e-8;
  std::uint64_t rng_seed = 0;
};

enum class IaaftStop { SpectrumTolerance, RankFixedPoint, MaxIterations };

struct IaaftResult {
  /// Rank-adjusted iterate: a permutation of the source values.
  std::vector<double> values;
  std::size_t iterations = 0;
  /// Relative L2 amplitude-spectrum discrepancy of `values`.
  double spectrum_residual = 0.0;
  IaaftStop stop = IaaftStop::MaxIterations;
};

/// Relative L2 distance between the DFT amplitude spectra of two equal-length
/// series, normalised by the second.
double amplitude_spectrum_residual(std::span<const double> x, std::span<const double> reference);

/// Iterative amplitude adjusted Fourier transform surrogate.
/// Throws LengthTooShort (n < 8) or ConstantSeries.
IaaftResult iaaft(std::span<const double> x, const IaaftConfig& cfg);

struct SurrogateEnsemble {
  std::string source_label;
  std::uint64_t base_seed = 0;
  std::vector<std::vector<double>> surrogates;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> iterations;
  std::vector<double> residuals;

  std::size_t size() const noexcept { return surrogates.size(); }
};

struct EnsembleOptions {
  std::size_t size = 1000;
  std::uint64_t base_seed = 0;
  std::size_t max_iterations = 1000;
  double spectrum_tolerance = 1e-8;
  /// 0 selects std::thread::hardware_concurrency().
  std::size_t workers = 0;
  /// Polled between members; set to abandon the run with Error{Cancelled}.
  const std::atomic<bool>* cancel = nullptr;
};

/// Member i uses seed derive_seed(base_seed, i); the result does not depend on
/// the worker count.
SurrogateEnsemble make_ensemble(std::span<const double> x, const EnsembleOptions& opts,
                                std::string label = {});

/// Columnar export (surrogate, t, value) plus a JSON manifest of seeds,
/// iteration counts and residuals.
void write_ensemble(const SurrogateEnsemble& ensemble, const std::filesystem::path& values_csv,
                    const std::filesystem::path& manifest_json);

std::size_t resolve_workers(std::size_t requested, std::size_t jobs);

}  // namespace mfa
