#include <doctest.h>

#include <cmath>

#include "mfa/errors.hpp"
#include "mfa/ingest.hpp"
#include "scratch_dir.hpp"

using namespace mfa;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected mfa::Error");
  return ErrorCode::InvalidConfig;
}

std::size_t line_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    REQUIRE(e.line().has_value());
    return *e.line();
  }
  FAIL("expected mfa::Error");
  return 0;
}

}  // namespace

TEST_CASE("dates: ISO first, DD/MM/YYYY fallback, impossible dates rejected") {
  Date d;
  REQUIRE(parse_date("2000-01-03", d));
  CHECK(d == Date{year{2000}, month{1}, day{3}});
  REQUIRE(parse_date("31/08/2022", d));
  CHECK(d == Date{year{2022}, month{8}, day{31}});
  CHECK_FALSE(parse_date("2021-02-29", d));
  CHECK_FALSE(parse_date("31/02/2020", d));
  CHECK_FALSE(parse_date("03-01-2000", d));
  CHECK_FALSE(parse_date("", d));
  CHECK(format_date(Date{year{2000}, month{1}, day{3}}) == "2000-01-03");
}

TEST_CASE("decimals tolerate thousands separators") {
  double v = 0.0;
  REQUIRE(parse_decimal("1,234.5", v));
  CHECK(v == 1234.5);
  REQUIRE(parse_decimal("1_000", v));
  CHECK(v == 1000.0);
  REQUIRE(parse_decimal(" 12 345 ", v));
  CHECK(v == 12345.0);
  CHECK_FALSE(parse_decimal("abc", v));
  CHECK_FALSE(parse_decimal("", v));
  CHECK_FALSE(parse_decimal("1.2.3", v));
}

TEST_CASE("delimiter detection") {
  CHECK(detect_delimiter("date,value") == ',');
  CHECK(detect_delimiter("date;value;extra") == ';');
  CHECK(detect_delimiter("date\tvalue") == '\t');
}

TEST_CASE("price CSV round trip with quoted fields, semicolons and skipped rows") {
  ScratchDir dir("ingest");
  const auto p = dir.write("goi.csv",
                           "\xEF\xBB\xBF" "date;value;note\n"
                           "2000-01-03;100;\"a;b\"\n"
                           "\n"
                           "2000-01-04;;gap\n"
                           "05/01/2000;\"1,000.5\";x\n"
                           "2000-01-06;110;\n");
  const PriceSeries s = load_price_csv(p, {});
  REQUIRE(s.size() == 3);
  CHECK(s.values[1] == 1000.5);
  CHECK(s.dates[1] == Date{year{2000}, month{1}, day{5}});
  CHECK(s.label == "goi");

  const ReturnSeries r = log_returns(s);
  REQUIRE(r.size() == 2);
  CHECK(r.source_length == 3);
  CHECK(r.values[0] == doctest::Approx(std::log(1000.5 / 100.0)).epsilon(1e-15));
  CHECK(r.values[1] == doctest::Approx(std::log(110.0 / 1000.5)).epsilon(1e-15));
}

TEST_CASE("custom column names") {
  ScratchDir dir("ingest");
  const auto p = dir.write("x.csv", "Close,Day\n5,2001-01-01\n6,2001-01-02\n");
  const PriceSeries s = load_price_csv(p, {"Day", "Close"});
  CHECK(s.values == std::vector<double>{5.0, 6.0});
}

TEST_CASE("errors carry codes and 1-based line numbers (header = line 1)") {
  ScratchDir dir("ingest");
  CHECK(code_of([&] { load_price_csv(dir.path() / "missing.csv", {}); }) == ErrorCode::FileNotFound);

  const auto bad_date = dir.write("a.csv", "date,value\n2000-01-03,1\n2000-13-01,2\n");
  CHECK(code_of([&] { load_price_csv(bad_date, {}); }) == ErrorCode::MalformedRow);
  CHECK(line_of([&] { load_price_csv(bad_date, {}); }) == 3);

  const auto back = dir.write("b.csv", "date,value\n2000-01-03,1\n2000-01-05,2\n2000-01-05,3\n");
  CHECK(code_of([&] { load_price_csv(back, {}); }) == ErrorCode::NonMonotoneDates);
  CHECK(line_of([&] { load_price_csv(back, {}); }) == 4);

  const auto neg = dir.write("c.csv", "date,value\n2000-01-03,1\n2000-01-04,0\n");
  CHECK(code_of([&] { load_price_csv(neg, {}); }) == ErrorCode::NonPositivePrice);
  CHECK(line_of([&] { load_price_csv(neg, {}); }) == 3);

  const auto one = dir.write("d.csv", "date,value\n2000-01-03,1\n");
  CHECK(code_of([&] { load_price_csv(one, {}); }) == ErrorCode::SeriesTooShort);

  const auto nocol = dir.write("e.csv", "day,price\n2000-01-03,1\n2000-01-04,2\n");
  CHECK(code_of([&] { load_price_csv(nocol, {}); }) == ErrorCode::MalformedRow);
}

TEST_CASE("raw series accept negative values") {
  ScratchDir dir("ingest");
  const auto p = dir.write("n.csv", "date,value\n2000-01-01,-1.5\n2000-01-02,0\n2000-01-03,2\n");
  const RawSeries s = load_series_csv(p, {});
  CHECK(s.values == std::vector<double>{-1.5, 0.0, 2.0});
}

TEST_CASE("display transform maps returns into [10, 90]") {
  ReturnSeries r{{0.02, -0.04, 0.01}, "x", 4};
  const auto d = display_transform(r);
  CHECK(d[0] == doctest::Approx(70.0));
  CHECK(d[1] == doctest::Approx(10.0));
  CHECK(d[2] == doctest::Approx(60.0));
  ReturnSeries flat{{0.0, 0.0}, "z", 3};
  CHECK(code_of([&] { display_transform(flat); }) == ErrorCode::DegenerateSeries);
}
