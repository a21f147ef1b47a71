#include <doctest.h>

#include <cmath>
#include <limits>

#include "mfa/errors.hpp"
#include "mfa/report.hpp"
#include "scratch_dir.hpp"

using namespace mfa;

namespace {

TestReport sample_report(int order, Verdict verdict, double width_p) {
  TestReport r;
  r.label = "GOI";
  r.detrend_order = order;
  r.q_grid = {-1.0, 0.0, 1.0, 2.0};
  r.hurst2 = 0.6080;
  r.hurst2_surrogate_mean = 0.61;
  r.hurst2_surrogate_std = 0.01;
  r.hurst2_within_1sigma = true;
  r.hurst2_within_3sigma = true;
  r.quad.coef = {-1.0, 0.6, -0.01};
  r.quad.std_error = {0.0, 0.0, 0.0};
  r.quad.t_stat = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), -3.5};
  r.quad.p_value = {0.0, 0.0, 0.004};
  r.quad.f_stat = 1234.5;
  r.quad.dof = 38;
  r.quad.r_squared = 0.999;
  r.width = {0.2136, 0.0891, 0.0502, 9, 1000, width_p};
  r.spectrum_difference = {0.3, 0.1, 0.05, 15, 1000, 0.015};
  r.shape = {true, true, false};
  r.nonlinear_tau = true;
  r.concave_tau = true;
  r.verdict = verdict;
  r.external_rows.push_back({"MF-DMA", false, false, true, false, 0.714, 0.204});
  return r;
}

}  // namespace

TEST_CASE("report JSON round trip keeps every field, including infinities") {
  const auto r = sample_report(1, Verdict::IntrinsicMultifractality, 0.009);
  const auto back = report_from_json(to_json(r));
  CHECK(to_json(back) == to_json(r));
  CHECK(std::isinf(back.quad.t_stat[0]));
  CHECK(back.quad.t_stat[0] < 0.0);
  CHECK(back.external_rows.size() == 1);
  CHECK(back.external_rows[0].method == "MF-DMA");
  CHECK(back.verdict == Verdict::IntrinsicMultifractality);
  CHECK(back.width.exceed_count == 9);

  ScratchDir dir("report");
  write_report(r, dir.path() / "r.json");
  CHECK(to_json(read_report(dir.path() / "r.json")) == to_json(r));
  CHECK_THROWS_AS(read_report(dir.path() / "none.json"), Error);
  dir.write("bad.json", "{\"label\": 3");
  CHECK_THROWS_AS(read_report(dir.path() / "bad.json"), Error);
}

TEST_CASE("text table lists the external rows above our own row") {
  const auto text = format_report_table(sample_report(2, Verdict::ApparentOnly, 0.2));
  const auto ext = text.find("MF-DMA");
  const auto own = text.find("MF-DFA (l=2)");
  REQUIRE(ext != std::string::npos);
  REQUIRE(own != std::string::npos);
  CHECK(ext < own);
  CHECK(text.find("apparent only") != std::string::npos);
}

TEST_CASE("order comparison flags disagreements") {
  const auto a = sample_report(1, Verdict::ApparentOnly, 0.20);
  const auto b = sample_report(2, Verdict::IntrinsicMultifractality, 0.01);
  const auto cmp = compare_orders(a, b);
  CHECK(cmp.first_order == 1);
  CHECK(cmp.second_order == 2);
  CHECK(cmp.verdict_disagreement);
  CHECK(cmp.width_decision_disagreement);
  CHECK(cmp.rows.front().metric == "H(2)");
  CHECK(cmp.rows.front().difference == 0.0);
  CHECK(format_comparison(cmp).find("DISAGREE") != std::string::npos);

  const auto same = compare_orders(a, sample_report(2, Verdict::ApparentOnly, 0.3));
  CHECK_FALSE(same.verdict_disagreement);
  CHECK_FALSE(same.width_decision_disagreement);

  ScratchDir dir("report");
  write_comparison_csv(cmp, dir.path() / "c.csv");
  const auto csv = slurp(dir.path() / "c.csv");
  CHECK(csv.rfind("metric,order_1,order_2,difference\n", 0) == 0);
  CHECK(csv.find("disagree") != std::string::npos);

  auto other = b;
  other.q_grid.push_back(3.0);
  CHECK_THROWS_AS(compare_orders(a, other), Error);
}
