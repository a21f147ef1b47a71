#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfa/mftest.hpp"

namespace mfa {

nlohmann::json to_json(const TestReport& report);
TestReport report_from_json(const nlohmann::json& doc);

TestReport read_report(const std::filesystem::path& path);
void write_report(const TestReport& report, const std::filesystem::path& path);

/// Plain-text report: quadratic fit, width test, spectrum-difference test and
/// the shape/verdict row.
std::string format_report_table(const TestReport& report);

struct ComparisonRow {
  std::string metric;
  double first = 0.0;
  double second = 0.0;
  double difference = 0.0;  ///< second - first
};

struct OrderComparison {
  int first_order = 1;
  int second_order = 2;
  std::vector<ComparisonRow> rows;
  Verdict first_verdict = Verdict::None;
  Verdict second_verdict = Verdict::None;
  bool verdict_disagreement = false;
  /// Any of the width-test decisions at the significance level differ.
  bool width_decision_disagreement = false;
};

/// Side-by-side H(2), delta alpha, delta f, p-values and verdicts of two runs
/// of the same input. Throws GridMismatch when q grids differ.
OrderComparison compare_orders(const TestReport& first, const TestReport& second);

std::string format_comparison(const OrderComparison& cmp);
void write_comparison_csv(const OrderComparison& cmp, const std::filesystem::path& path);

}  // namespace mfa
