#include "mfa/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

using nlohmann::json;

// JSON has no inf/nan; exact fits produce infinite t and F statistics.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw Error(ErrorCode::MalformedRow, "report field is not a number: " + j.dump());
}

json exceedance_json(const ExceedanceTest& t) {
  return {{"observed", number(t.observed)},
          {"surrogate_mean", number(t.sample_mean)},
          {"surrogate_std", number(t.sample_std)},
          {"exceed_count", t.exceed_count},
          {"surrogates", t.sample_size},
          {"p_value", number(t.p_value)}};
}

ExceedanceTest exceedance_from(const json& j) {
  ExceedanceTest t;
  t.observed = read_number(j.at("observed"));
  t.sample_mean = read_number(j.at("surrogate_mean"));
  t.sample_std = read_number(j.at("surrogate_std"));
  t.exceed_count = j.at("exceed_count").get<std::size_t>();
  t.sample_size = j.at("surrogates").get<std::size_t>();
  t.p_value = read_number(j.at("p_value"));
  return t;
}

const char* mark(bool b) { return b ? "yes" : "no"; }

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

json to_json(const TestReport& r) {
  json quad;
  for (int k = 0; k < 3; ++k) {
    quad["a" + std::to_string(k)] = {{"coef", number(r.quad.coef[k])},
                                     {"std_error", number(r.quad.std_error[k])},
                                     {"t_stat", number(r.quad.t_stat[k])},
                                     {"p_value", number(r.quad.p_value[k])}};
  }
  quad["f_stat"] = number(r.quad.f_stat);
  quad["f_p_value"] = number(r.quad.f_p_value);
  quad["r_squared"] = number(r.quad.r_squared);
  quad["dof"] = r.quad.dof;
  quad["note"] =
      "classical OLS sampling theory; tau(q) grid points are serially dependent, so p-values are "
      "descriptive";

  json external = json::array();
  for (const auto& row : r.external_rows) {
    external.push_back({{"method", row.method},
                        {"hurst_monotone", row.hurst_monotone},
                        {"bell_shaped", row.bell_shaped},
                        {"nonlinear_tau", row.nonlinear_tau},
                        {"concave_tau", row.concave_tau},
                        {"width_p_value", number(row.width_p_value)},
                        {"spectrum_difference_p_value", number(row.spectrum_difference_p_value)}});
  }

  return {{"label", r.label},
          {"detrend_order", r.detrend_order},
          {"significance", r.significance},
          {"q_grid", r.q_grid},
          {"hurst2",
           {{"value", number(r.hurst2)},
            {"surrogate_mean", number(r.hurst2_surrogate_mean)},
            {"surrogate_std", number(r.hurst2_surrogate_std)},
            {"within_1sigma", r.hurst2_within_1sigma},
            {"within_3sigma", r.hurst2_within_3sigma}}},
          {"quadratic_tau_fit", quad},
          {"width_test", exceedance_json(r.width)},
          {"spectrum_difference_test", exceedance_json(r.spectrum_difference)},
          {"shape",
           {{"hurst_monotone_decreasing", r.shape.hurst_monotone},
            {"bell_shaped", r.shape.bell_shaped},
            {"knot", r.shape.knot},
            {"bell_criterion", "alpha(q) non-increasing in q"}}},
          {"nonlinear_tau", r.nonlinear_tau},
          {"concave_tau", r.concave_tau},
          {"verdict", std::string(to_string(r.verdict))},
          {"external_rows", external}};
}

TestReport report_from_json(const json& doc) {
  try {
    TestReport r;
    r.label = doc.at("label").get<std::string>();
    r.detrend_order = doc.at("detrend_order").get<int>();
    r.significance = doc.at("significance").get<double>();
    r.q_grid = doc.at("q_grid").get<std::vector<double>>();
    const auto& h = doc.at("hurst2");
    r.hurst2 = read_number(h.at("value"));
    r.hurst2_surrogate_mean = read_number(h.at("surrogate_mean"));
    r.hurst2_surrogate_std = read_number(h.at("surrogate_std"));
    r.hurst2_within_1sigma = h.at("within_1sigma").get<bool>();
    r.hurst2_within_3sigma = h.at("within_3sigma").get<bool>();
    const auto& q = doc.at("quadratic_tau_fit");
    for (int k = 0; k < 3; ++k) {
      const auto& a = q.at("a" + std::to_string(k));
      r.quad.coef[k] = read_number(a.at("coef"));
      r.quad.std_error[k] = read_number(a.at("std_error"));
      r.quad.t_stat[k] = read_number(a.at("t_stat"));
      r.quad.p_value[k] = read_number(a.at("p_value"));
    }
    r.quad.f_stat = read_number(q.at("f_stat"));
    r.quad.f_p_value = read_number(q.at("f_p_value"));
    r.quad.r_squared = read_number(q.at("r_squared"));
    r.quad.dof = q.at("dof").get<std::size_t>();
    r.width = exceedance_from(doc.at("width_test"));
    r.spectrum_difference = exceedance_from(doc.at("spectrum_difference_test"));
    const auto& s = doc.at("shape");
    r.shape.hurst_monotone = s.at("hurst_monotone_decreasing").get<bool>();
    r.shape.bell_shaped = s.at("bell_shaped").get<bool>();
    r.shape.knot = s.at("knot").get<bool>();
    r.nonlinear_tau = doc.at("nonlinear_tau").get<bool>();
    r.concave_tau = doc.at("concave_tau").get<bool>();
    const auto verdict = parse_verdict(doc.at("verdict").get<std::string>());
    if (!verdict) throw Error(ErrorCode::MalformedRow, "unknown verdict in report");
    r.verdict = *verdict;
    if (doc.contains("external_rows")) {
      for (const auto& e : doc.at("external_rows")) {
        ExternalRow row;
        row.method = e.at("method").get<std::string>();
        row.hurst_monotone = e.at("hurst_monotone").get<bool>();
        row.bell_shaped = e.at("bell_shaped").get<bool>();
        row.nonlinear_tau = e.at("nonlinear_tau").get<bool>();
        row.concave_tau = e.at("concave_tau").get<bool>();
        row.width_p_value = read_number(e.at("width_p_value"));
        row.spectrum_difference_p_value = read_number(e.at("spectrum_difference_p_value"));
        r.external_rows.push_back(row);
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRow, std::string("report document: ") + e.what());
  }
}

TestReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRow, path.string() + ": " + e.what());
  }
  return report_from_json(doc);
}

void write_report(const TestReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, path.string());
  out << to_json(report).dump(2) << '\n';
}

std::string format_report_table(const TestReport& r) {
  std::ostringstream os;
  os << "Series: " << (r.label.empty() ? "(unnamed)" : r.label) << "   detrending order: "
     << r.detrend_order << "   significance: " << r.significance << "\n\n";

  os << "H(2) = " << fmt("%.4f", r.hurst2) << "   surrogates: " << fmt("%.4f", r.hurst2_surrogate_mean)
     << " +/- " << fmt("%.4f", r.hurst2_surrogate_std)
     << "   within 1 sigma: " << mark(r.hurst2_within_1sigma) << "\n\n";

  os << "Nonlinearity of tau(q) = a0 + a1 q + a2 q^2\n";
  os << "  Full model:     F = " << fmt("%.0f", r.quad.f_stat) << "  p = " << fmt("%.4f", r.quad.f_p_value)
     << "  R^2 = " << fmt("%.4f", r.quad.r_squared) << "\n";
  os << "  Linear term:    a1 = " << fmt("%.4f", r.quad.coef[1]) << "  t = " << fmt("%.0f", r.quad.t_stat[1])
     << "  p = " << fmt("%.4f", r.quad.p_value[1]) << "\n";
  os << "  Quadratic term: a2 = " << fmt("%.4f", r.quad.coef[2]) << "  t = " << fmt("%.0f", r.quad.t_stat[2])
     << "  p = " << fmt("%.4f", r.quad.p_value[2]) << "\n\n";

  const auto exceed = [&](const char* name, const char* stat, const ExceedanceTest& t) {
    os << name << "\n  " << stat << " = " << fmt("%.4f", t.observed) << "  <surrogates> = "
       << fmt("%.4f", t.sample_mean) << "  sigma = " << fmt("%.4f", t.sample_std)
       << "  p-value = " << fmt("%.4f", t.p_value) << "  (" << t.exceed_count << "/" << t.sample_size
       << ")\n\n";
  };
  exceed("Singularity width test", "delta_alpha", r.width);
  exceed("Spectrum difference test (corroborating only)", "delta_f", r.spectrum_difference);

  os << "Summary\n";
  os << "  method            dH/dq<0  bell  a2!=0  a2<0  Pr(da<da^)  Pr(df<df^)\n";
  const auto row = [&](const std::string& method, bool mono, bool bell, bool nonlin, bool concave,
                       double pw, double pf) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-17s %-8s %-5s %-6s %-5s %-11.4f %.4f\n", method.c_str(),
                  mark(mono), mark(bell), mark(nonlin), mark(concave), pw, pf);
    os << buf;
  };
  for (const auto& e : r.external_rows) {
    row(e.method, e.hurst_monotone, e.bell_shaped, e.nonlinear_tau, e.concave_tau, e.width_p_value,
        e.spectrum_difference_p_value);
  }
  row("MF-DFA (l=" + std::to_string(r.detrend_order) + ")", r.shape.hurst_monotone, r.shape.bell_shaped,
      r.nonlinear_tau, r.concave_tau, r.width.p_value, r.spectrum_difference.p_value);
  os << "\nVerdict: " << to_string(r.verdict) << "\n";
  os << "Note: t/F p-values use classical OLS theory on serially dependent tau(q) points.\n";
  return os.str();
}

OrderComparison compare_orders(const TestReport& first, const TestReport& second) {
  if (first.q_grid != second.q_grid) {
    throw Error(ErrorCode::GridMismatch, "reports were computed on different q grids");
  }
  OrderComparison cmp;
  cmp.first_order = first.detrend_order;
  cmp.second_order = second.detrend_order;
  const auto add = [&](std::string metric, double a, double b) {
    cmp.rows.push_back({std::move(metric), a, b, b - a});
  };
  add("H(2)", first.hurst2, second.hurst2);
  add("delta_alpha", first.width.observed, second.width.observed);
  add("delta_alpha_surrogate_mean", first.width.sample_mean, second.width.sample_mean);
  add("width_p_value", first.width.p_value, second.width.p_value);
  add("delta_f", first.spectrum_difference.observed, second.spectrum_difference.observed);
  add("spectrum_difference_p_value", first.spectrum_difference.p_value,
      second.spectrum_difference.p_value);
  add("a2", first.quad.coef[2], second.quad.coef[2]);
  cmp.first_verdict = first.verdict;
  cmp.second_verdict = second.verdict;
  cmp.verdict_disagreement = first.verdict != second.verdict;
  cmp.width_decision_disagreement =
      (first.width.p_value < first.significance) != (second.width.p_value < second.significance);
  return cmp;
}

std::string format_comparison(const OrderComparison& cmp) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-30s %12s %12s %12s\n", "metric",
                ("l=" + std::to_string(cmp.first_order)).c_str(),
                ("l=" + std::to_string(cmp.second_order)).c_str(), "difference");
  os << buf;
  for (const auto& row : cmp.rows) {
    std::snprintf(buf, sizeof buf, "%-30s %12.4f %12.4f %12.4f\n", row.metric.c_str(), row.first,
                  row.second, row.difference);
    os << buf;
  }
  os << "verdict: " << to_string(cmp.first_verdict) << " | " << to_string(cmp.second_verdict)
     << (cmp.verdict_disagreement ? "   ** DISAGREE **" : "") << "\n";
  os << "width-test decision disagreement: " << mark(cmp.width_decision_disagreement) << "\n";
  return os.str();
}

void write_comparison_csv(const OrderComparison& cmp, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw Error(ErrorCode::IoError, path.string());
  std::fprintf(f, "metric,order_%d,order_%d,difference\n", cmp.first_order, cmp.second_order);
  for (const auto& row : cmp.rows) {
    std::fprintf(f, "%s,%.17g,%.17g,%.17g\n", row.metric.c_str(), row.first, row.second, row.difference);
  }
  std::fprintf(f, "verdict,%s,%s,%s\n", std::string(to_string(cmp.first_verdict)).c_str(),
               std::string(to_string(cmp.second_verdict)).c_str(),
               cmp.verdict_disagreement ? "disagree" : "agree");
  std::fclose(f);
}

}  // namespace mfa
