#include "mfa/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "mfa/errors.hpp"

namespace mfa {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Quote-aware split; doubled quotes inside a quoted field are an escaped quote.
std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == name) return i;
  }
  throw Error(ErrorCode::MalformedRow,
              "column '" + name + "' not found in header of " + path.string(), 1);
}

struct Row {
  std::size_t line;
  Date date;
  double value;
};

struct Table {
  std::vector<Row> rows;
  std::string label;
};

Table read_table(const std::filesystem::path& path, const ColumnSpec& columns) {
  std::ifstream in(path);
  if (!std::filesystem::exists(path) || !in) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::vector<std::string>> header;
  char delim = ',';
  // Skip leading blank lines before the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.erase(0, 3);
    }
    delim = detect_delimiter(line);
    header = split_fields(line, delim);
    break;
  }
  if (!header) throw Error(ErrorCode::MalformedRow, "missing header row in " + path.string(), 1);

  const std::size_t date_idx = find_column(*header, columns.date_column, path);
  const std::size_t value_idx = find_column(*header, columns.value_column, path);

  Table table;
  table.label = path.stem().string();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      std::cerr << "warning: " << path.string() << ":" << line_no << ": blank row skipped\n";
      continue;
    }
    const auto fields = split_fields(line, delim);
    if (fields.size() <= std::max(date_idx, value_idx)) {
      throw Error(ErrorCode::MalformedRow, "too few fields", line_no);
    }
    const auto value_text = trim(fields[value_idx]);
    if (value_text.empty()) {
      std::cerr << "warning: " << path.string() << ":" << line_no << ": missing value skipped\n";
      continue;
    }
    Row row{line_no, {}, 0.0};
    if (!parse_date(trim(fields[date_idx]), row.date)) {
      throw Error(ErrorCode::MalformedRow, "bad date '" + std::string(trim(fields[date_idx])) + "'",
                  line_no);
    }
    if (!parse_decimal(value_text, row.value) || !std::isfinite(row.value)) {
      throw Error(ErrorCode::MalformedRow, "bad value '" + std::string(value_text) + "'", line_no);
    }
    if (!table.rows.empty() && !(table.rows.back().date < row.date)) {
      throw Error(ErrorCode::NonMonotoneDates, format_date(row.date), line_no);
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace

bool parse_date(std::string_view text, Date& out) {
  text = trim(text);
  int y = 0, m = 0, d = 0;
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
        !parse_int(text.substr(8, 2), d)) {
      return false;
    }
  } else {
    const auto s1 = text.find('/');
    const auto s2 = s1 == std::string_view::npos ? s1 : text.find('/', s1 + 1);
    if (s2 == std::string_view::npos) return false;
    if (!parse_int(text.substr(0, s1), d) || !parse_int(text.substr(s1 + 1, s2 - s1 - 1), m) ||
        !parse_int(text.substr(s2 + 1), y) || text.size() - s2 - 1 != 4) {
      return false;
    }
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return false;
  out = date;
  return true;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

bool parse_decimal(std::string_view text, double& out) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : trim(text)) {
    if (c == ',' || c == '_' || c == ' ') continue;
    cleaned.push_back(c);
  }
  if (cleaned.empty()) return false;
  const char* first = cleaned.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, cleaned.data() + cleaned.size(), out);
  return ec == std::errc() && ptr == cleaned.data() + cleaned.size();
}

char detect_delimiter(std::string_view header_line) {
  constexpr std::array<char, 3> candidates{',', ';', '\t'};
  char best = ',';
  std::ptrdiff_t best_count = 0;
  for (char c : candidates) {
    const auto n = std::count(header_line.begin(), header_line.end(), c);
    if (n > best_count) {
      best = c;
      best_count = n;
    }
  }
  return best;
}

PriceSeries load_price_csv(const std::filesystem::path& path, const ColumnSpec& columns) {
  Table table = read_table(path, columns);
  PriceSeries series;
  series.label = table.label;
  series.dates.reserve(table.rows.size());
  series.values.reserve(table.rows.size());
  for (const Row& row : table.rows) {
    if (!(row.value > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, std::to_string(row.value), row.line);
    }
    series.dates.push_back(row.date);
    series.values.push_back(row.value);
  }
  if (series.size() < 2) {
    throw Error(ErrorCode::SeriesTooShort,
                path.string() + " has " + std::to_string(series.size()) + " usable rows");
  }
  return series;
}

RawSeries load_series_csv(const std::filesystem::path& path, const ColumnSpec& columns) {
  Table table = read_table(path, columns);
  RawSeries series;
  series.label = table.label;
  for (const Row& row : table.rows) {
    series.dates.push_back(row.date);
    series.values.push_back(row.value);
  }
  if (series.values.size() < 2) {
    throw Error(ErrorCode::SeriesTooShort, path.string());
  }
  return series;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.size() < 2) {
    throw Error(ErrorCode::SeriesTooShort, "log returns need at least two prices");
  }
  ReturnSeries r;
  r.label = prices.label;
  r.source_length = prices.size();
  r.values.resize(prices.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) {
    r.values[t] = std::log(prices.values[t + 1]) - std::log(prices.values[t]);
  }
  return r;
}

std::vector<double> display_transform(const ReturnSeries& returns) {
  double peak = 0.0;
  for (double v : returns.values) peak = std::max(peak, std::abs(v));
  if (returns.values.empty() || peak == 0.0) {
    throw Error(ErrorCode::DegenerateSeries, "max |r| is zero");
  }
  std::vector<double> out(returns.size());
  for (std::size_t t = 0; t < returns.size(); ++t) {
    out[t] = 40.0 * returns.values[t] / peak + 50.0;
  }
  return out;
}

}  // namespace mfa
