#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfa/ingest.hpp"
#include "mfa/mfdfa.hpp"
#include "mfa/mftest.hpp"
#include "mfa/report.hpp"

namespace mfa {

inline constexpr const char* kVersion = "1.0.0";

enum class SynthKind { Cascade, Fbm, Fgn, WhiteNoise };

/// Parsed form of "kind[:key=value,...]", e.g. "cascade:levels=16,p=0.3",
/// "fgn:n=16384,hurst=0.7,seed=3", "noise:n=16384,seed=1".
struct SynthSpec {
  SynthKind kind = SynthKind::WhiteNoise;
  int levels = 16;
  double p = 0.3;
  std::size_t n = 1 << 14;
  double hurst = 0.5;
  std::uint64_t seed = 0;
};

SynthSpec parse_synth_spec(std::string_view text);
std::string to_string(const SynthSpec& spec);

/// The series a synth spec describes; this is what gets analysed (fGn, noise
/// and cascade masses are increments; "fbm" yields the path).
std::vector<double> generate(const SynthSpec& spec);

/// Date/value CSV readable by load_series_csv; dates are consecutive days
/// starting 2000-01-01.
void write_series_csv(std::span<const double> values, const std::filesystem::path& path);

/// How the value column of an input file is interpreted.
enum class InputKind {
  Prices,      ///< positive prices; log returns are analysed
  Increments,  ///< values are analysed directly
};

struct RunConfig {
  std::optional<std::filesystem::path> input;
  std::optional<SynthSpec> synth;
  ColumnSpec columns;
  InputKind input_kind = InputKind::Prices;
  std::vector<int> detrend_orders{1};
  double q_min = -5.0, q_max = 5.0, q_step = 0.25;
  std::size_t s_min = 20, s_max = 316, s_count = 30;
  std::size_t ensemble_size = 1000;
  std::uint64_t base_seed = 0;
  std::size_t max_iterations = 1000;
  double spectrum_tolerance = 1e-8;
  std::filesystem::path out_dir = "mfa-run";
  double significance = 0.05;
  std::size_t workers = 0;
  std::vector<ExternalRow> external_rows;

  /// Throws InvalidConfig.
  void validate() const;
  AnalysisConfig analysis_config(int detrend_order) const;
};

struct OrderResult {
  int detrend_order = 1;
  MultifractalSpectrum spectrum;
  EnsembleStats ensemble;
  TestReport report;
};

struct RunResult {
  std::vector<OrderResult> orders;
  std::optional<OrderComparison> comparison;
};

/// The analysed series for a run config (log returns or raw increments).
std::vector<double> load_input(const RunConfig& cfg, std::string* label = nullptr,
                               std::string* fingerprint = nullptr);

/// Full pipeline. Writes into cfg.out_dir:
///   manifest.json, series.csv, surrogates_manifest.json,
///   order<l>/{surface,spectrum,ensemble_stats,delta_alpha_samples,
///             delta_f_samples}.csv, order<l>/report.{json,txt},
///   comparison.{csv,txt} when two orders run.
/// An INCOMPLETE marker exists until the run finishes; on failure or
/// cancellation it stays and records the reason.
RunResult run_pipeline(const RunConfig& cfg, const std::atomic<bool>* cancel = nullptr);

/// MF-DFA only (no surrogates): surface, spectrum, quadratic fit and shape
/// flags per order.
void run_spectrum_only(const RunConfig& cfg);

/// Surrogate ensemble spectra, analysed in parallel; order-independent.
std::vector<MultifractalSpectrum> analyze_ensemble(const std::vector<std::vector<double>>& series,
                                                   const AnalysisConfig& cfg, std::size_t workers,
                                                   const std::atomic<bool>* cancel = nullptr);

void write_surface_csv(const FluctuationSurface& surface, const std::filesystem::path& path);
void write_spectrum_csv(const MultifractalSpectrum& spectrum, const std::filesystem::path& path);
void write_ensemble_stats_csv(const EnsembleStats& stats, const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace mfa
