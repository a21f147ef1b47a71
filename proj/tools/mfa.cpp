// mfa: multifractal detrended fluctuation analysis with IAAFT surrogate tests.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
// failure (also used for interrupted runs).

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfa/errors.hpp"
#include "mfa/pipeline.hpp"
#include "mfa/report.hpp"

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_interrupt(int) { g_cancel.store(true); }

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(const mfa::Error& e) {
  switch (e.category()) {
    case mfa::ErrorCategory::Config: return kExitConfig;
    case mfa::ErrorCategory::Data: return kExitData;
    case mfa::ErrorCategory::Numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

void print_error(const mfa::Error& e) {
  nlohmann::json doc{{"error", std::string(mfa::to_string(e.code()))}, {"message", e.what()}};
  if (e.line()) doc["line"] = *e.line();
  std::cerr << doc.dump() << "\n";
}

struct Options {
  std::string input;
  std::string synth;
  std::string input_kind = "prices";
  std::string date_col = "date";
  std::string value_col = "value";
  std::vector<int> orders{1};
  double q_min = -5.0, q_max = 5.0, q_step = 0.25;
  std::size_t s_min = 20, s_max = 316, s_count = 30;
  std::size_t surrogates = 1000;
  std::uint64_t seed = 0;
  double alpha_level = 0.05;
  std::string out = "mfa-run";
  std::size_t workers = 0;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-8;
  std::string external_rows;
};

void add_analysis_flags(CLI::App* cmd, Options& o, bool with_surrogates) {
  cmd->add_option("--input", o.input, "Delimited file with a header row")->envname("MFA_INPUT");
  cmd->add_option("--synth", o.synth, "Synthetic input, e.g. cascade:levels=16,p=0.3")
      ->envname("MFA_SYNTH");
  cmd->add_option("--input-kind", o.input_kind, "prices (analyse log returns) or increments")
      ->check(CLI::IsMember({"prices", "increments"}))
      ->envname("MFA_INPUT_KIND");
  cmd->add_option("--date-col", o.date_col, "Date column name")->envname("MFA_DATE_COL");
  cmd->add_option("--value-col", o.value_col, "Value column name")->envname("MFA_VALUE_COL");
  cmd->add_option("--detrend-order", o.orders, "Polynomial detrending order(s): 1 and/or 2")
      ->delimiter(',')
      ->check(CLI::IsMember({1, 2}))
      ->envname("MFA_DETREND_ORDER");
  cmd->add_option("--q-min", o.q_min)->envname("MFA_Q_MIN");
  cmd->add_option("--q-max", o.q_max)->envname("MFA_Q_MAX");
  cmd->add_option("--q-step", o.q_step)->envname("MFA_Q_STEP");
  cmd->add_option("--s-min", o.s_min)->envname("MFA_S_MIN");
  cmd->add_option("--s-max", o.s_max)->envname("MFA_S_MAX");
  cmd->add_option("--s-count", o.s_count)->envname("MFA_S_COUNT");
  cmd->add_option("--out", o.out, "Run directory")->envname("MFA_OUT");
  if (with_surrogates) {
    cmd->add_option("--surrogates", o.surrogates, "IAAFT ensemble size")->envname("MFA_SURROGATES");
    cmd->add_option("--seed", o.seed, "Base seed for the surrogate ensemble")->envname("MFA_SEED");
    cmd->add_option("--alpha-level", o.alpha_level, "Significance level")->envname("MFA_ALPHA_LEVEL");
    cmd->add_option("--workers", o.workers, "Worker threads (0 = all cores)")->envname("MFA_WORKERS");
    cmd->add_option("--max-iterations", o.max_iterations, "IAAFT iteration cap")
        ->envname("MFA_MAX_ITERATIONS");
    cmd->add_option("--tolerance", o.tolerance, "IAAFT spectrum tolerance")->envname("MFA_TOLERANCE");
    cmd->add_option("--external-rows", o.external_rows,
                    "JSON array of externally computed comparison rows for the summary table")
        ->envname("MFA_EXTERNAL_ROWS");
  }
}

std::vector<mfa::ExternalRow> load_external_rows(const std::string& path) {
  std::vector<mfa::ExternalRow> rows;
  if (path.empty()) return rows;
  std::ifstream in(path);
  if (!in) throw mfa::Error(mfa::ErrorCode::FileNotFound, path);
  nlohmann::json doc;
  try {
    in >> doc;
    for (const auto& e : doc) {
      mfa::ExternalRow row;
      row.method = e.at("method").get<std::string>();
      row.hurst_monotone = e.value("hurst_monotone", false);
      row.bell_shaped = e.value("bell_shaped", false);
      row.nonlinear_tau = e.value("nonlinear_tau", false);
      row.concave_tau = e.value("concave_tau", false);
      row.width_p_value = e.value("width_p_value", 0.0);
      row.spectrum_difference_p_value = e.value("spectrum_difference_p_value", 0.0);
      rows.push_back(row);
    }
  } catch (const nlohmann::json::exception& e) {
    throw mfa::Error(mfa::ErrorCode::InvalidConfig, path + ": " + e.what());
  }
  return rows;
}

mfa::RunConfig to_run_config(const Options& o) {
  mfa::RunConfig cfg;
  if (!o.input.empty()) cfg.input = o.input;
  if (!o.synth.empty()) cfg.synth = mfa::parse_synth_spec(o.synth);
  cfg.input_kind = o.input_kind == "increments" ? mfa::InputKind::Increments : mfa::InputKind::Prices;
  cfg.columns = {o.date_col, o.value_col};
  cfg.detrend_orders = o.orders;
  cfg.q_min = o.q_min;
  cfg.q_max = o.q_max;
  cfg.q_step = o.q_step;
  cfg.s_min = o.s_min;
  cfg.s_max = o.s_max;
  cfg.s_count = o.s_count;
  cfg.ensemble_size = o.surrogates;
  cfg.base_seed = o.seed;
  cfg.significance = o.alpha_level;
  cfg.out_dir = o.out;
  cfg.workers = o.workers;
  cfg.max_iterations = o.max_iterations;
  cfg.spectrum_tolerance = o.tolerance;
  cfg.external_rows = load_external_rows(o.external_rows);
  return cfg;
}

std::filesystem::path resolve_report(const std::filesystem::path& p, int order) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(p)) return p;
  if (fs::exists(p / "report.json")) return p / "report.json";
  return p / ("order" + std::to_string(order)) / "report.json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multifractal detrended fluctuation analysis with IAAFT surrogate tests"};
  app.set_version_flag("--version", mfa::kVersion);
  app.require_subcommand(1);

  Options analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Full pipeline: spectrum, surrogates, tests, verdict");
  add_analysis_flags(analyze, analyze_opts, true);

  Options spectrum_opts;
  auto* spectrum = app.add_subcommand("spectrum", "MF-DFA only, no surrogates");
  add_analysis_flags(spectrum, spectrum_opts, false);

  std::string synth_spec, synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic series as a date,value CSV");
  synth->add_option("spec", synth_spec, "e.g. cascade:levels=16,p=0.3 | fgn:n=16384,hurst=0.7,seed=1")
      ->required();
  synth->add_option("--out", synth_out, "Output CSV")->required()->envname("MFA_OUT");

  std::string cmp_a, cmp_b, cmp_out;
  auto* compare = app.add_subcommand("compare", "Compare the l=1 and l=2 results of a run");
  compare->add_option("--a", cmp_a, "Run directory or report.json for the first order")->required();
  compare->add_option("--b", cmp_b, "Run directory or report.json for the second order (defaults to --a)");
  compare->add_option("--out", cmp_out, "Optional CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);

  try {
    if (*analyze) {
      const mfa::RunConfig cfg = to_run_config(analyze_opts);
      const mfa::RunResult result = mfa::run_pipeline(cfg, &g_cancel);
      for (const auto& r : result.orders) std::cout << mfa::format_report_table(r.report) << "\n";
      if (result.comparison) std::cout << mfa::format_comparison(*result.comparison);
      std::cout << "artifacts: " << cfg.out_dir.string() << "\n";
    } else if (*spectrum) {
      mfa::RunConfig cfg = to_run_config(spectrum_opts);
      mfa::run_spectrum_only(cfg);
      std::cout << "artifacts: " << cfg.out_dir.string() << "\n";
    } else if (*synth) {
      const auto spec = mfa::parse_synth_spec(synth_spec);
      mfa::write_series_csv(mfa::generate(spec), synth_out);
    } else if (*compare) {
      const auto a = mfa::read_report(resolve_report(cmp_a, 1));
      const auto b = mfa::read_report(resolve_report(cmp_b.empty() ? cmp_a : cmp_b, 2));
      const auto cmp = mfa::compare_orders(a, b);
      std::cout << mfa::format_comparison(cmp);
      if (!cmp_out.empty()) mfa::write_comparison_csv(cmp, cmp_out);
    }
  } catch (const mfa::Error& e) {
    print_error(e);
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
    return kExitNumeric;
  }
  return 0;
}
