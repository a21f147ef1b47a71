#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace mfa {

using Date = std::chrono::year_month_day;

/// Daily index prices. Invariants: length >= 2, values > 0, dates strictly
/// increasing. Dates are kept for reporting; analysis uses sample index only.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  std::string label;

  std::size_t size() const noexcept { return values.size(); }
};

/// Log returns r[t] = ln P[t+1] - ln P[t]; size() == source_length - 1.
struct ReturnSeries {
  std::vector<double> values;
  std::string label;
  std::size_t source_length = 0;

  std::size_t size() const noexcept { return values.size(); }
};

struct ColumnSpec {
  std::string date_column = "date";
  std::string value_column = "value";
};

/// A date/value table without the price-specific checks, for series whose
/// values may be zero or negative (synthetic increments).
struct RawSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  std::string label;
};

/// Parses ISO-8601 (YYYY-MM-DD) with fallback DD/MM/YYYY. Returns false on
/// anything else, including impossible calendar dates.
bool parse_date(std::string_view text, Date& out);
std::string format_date(const Date& d);

/// Decimal parse with thousands separators (',', '_', ' ') stripped.
bool parse_decimal(std::string_view text, double& out);

/// Delimiter among ',', ';' and '\t' that occurs most often in the header.
char detect_delimiter(std::string_view header_line);

/// Loads a header-led delimited file. Blank rows and rows with an empty value
/// cell are skipped with a warning on stderr.
/// Throws Error{FileNotFound, MalformedRow, NonPositivePrice, NonMonotoneDates,
/// SeriesTooShort}.
PriceSeries load_price_csv(const std::filesystem::path& path, const ColumnSpec& columns);

/// Same parser, but values only need to be finite.
RawSeries load_series_csv(const std::filesystem::path& path, const ColumnSpec& columns);

ReturnSeries log_returns(const PriceSeries& prices);

/// 40 r / max|r| + 50, mapping returns into [10, 90] for plotting.
std::vector<double> display_transform(const ReturnSeries& returns);

}  // namespace mfa
