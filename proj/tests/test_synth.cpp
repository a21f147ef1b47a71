#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mfa/errors.hpp"
#include "mfa/synth.hpp"
#include "oracles.hpp"

using namespace mfa;

TEST_CASE("cascade masses: first levels by hand, total mass one") {
  const auto one = binomial_cascade({.levels = 1, .p = 0.3});
  CHECK(one == std::vector<double>{0.3, 0.7});
  const auto two = binomial_cascade({.levels = 2, .p = 0.3});
  REQUIRE(two.size() == 4);
  CHECK(two[0] == doctest::Approx(0.09));
  CHECK(two[1] == doctest::Approx(0.21));
  CHECK(two[2] == doctest::Approx(0.21));
  CHECK(two[3] == doctest::Approx(0.49));
  const auto deep = binomial_cascade({.levels = 16, .p = 0.3});
  CHECK(deep.size() == 65536);
  CHECK(std::accumulate(deep.begin(), deep.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_cascade({.levels = 4, .p = 0.6}), Error);
  CHECK_THROWS_AS(binomial_cascade({.levels = 0, .p = 0.3}), Error);
}

TEST_CASE("analytic H(q): frozen values") {
  // 1/2 - log2(0.58)/2 and -(log2 0.3 + log2 0.7)/2.
  CHECK(cascade_analytic_hq(0.3, 2.0) == doctest::Approx(0.8929375973235764).epsilon(1e-15));
  CHECK(cascade_analytic_hq(0.3, 0.0) == doctest::Approx(1.1257693834979823).epsilon(1e-15));
  CHECK(cascade_analytic_hq(0.5, 3.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double eps : {1e-7, -1e-7}) {
    CHECK(std::abs(cascade_analytic_hq(0.3, eps) - cascade_analytic_hq(0.3, 0.0)) < 1e-6);
  }
}

TEST_CASE("analytic H(q) matches the brute-force partition function to 1e-10") {
  for (double p : {0.3, 0.2, 0.45}) {
    for (bool shuffled : {false, true}) {
      CascadeSpec spec{.levels = 14, .p = p};
      if (shuffled) spec.shuffle_seed = 99;
      const auto cells = binomial_cascade(spec);
      for (double q = -5.0; q <= 5.0 + 1e-9; q += 0.25) {
        if (std::abs(q) < 1e-9) continue;
        for (int level : {3, 9}) {
          CHECK(std::abs(oracle::cascade_hq_from_partition(cells, level, q) - cascade_analytic_hq(p, q)) <=
                1e-10);
        }
      }
    }
  }
}

TEST_CASE("shuffled cascade permutes weights but keeps the multiset of masses") {
  auto a = binomial_cascade({.levels = 10, .p = 0.3});
  auto b = binomial_cascade({.levels = 10, .p = 0.3, .shuffle_seed = 4});
  CHECK(a != b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("fGn autocovariance") {
  CHECK(fgn_autocovariance(0.7, 0) == 1.0);
  CHECK(fgn_autocovariance(0.7, 1) == doctest::Approx(0.3195079107728942).epsilon(1e-14));
  for (std::size_t k = 1; k < 10; ++k) CHECK(std::abs(fgn_autocovariance(0.5, k)) < 1e-15);
}

TEST_CASE("fGn reproduces variance and lag-1 correlation") {
  for (double h : {0.3, 0.5, 0.7}) {
    double rho = 0.0, var = 0.0;
    const int reps = 8;
    for (int seed = 0; seed < reps; ++seed) {
      const auto x = fgn({.n = 1 << 14, .hurst = h, .seed = static_cast<std::uint64_t>(seed)});
      REQUIRE(x.size() == (1u << 14));
      rho += oracle::lag_autocorrelation(x, 1);
      double s = 0.0;
      for (double v : x) s += v * v;
      var += s / static_cast<double>(x.size());
    }
    CHECK(std::abs(rho / reps - fgn_autocovariance(h, 1)) < 0.03);
    CHECK(std::abs(var / reps - 1.0) < 0.1);
  }
}

TEST_CASE("generators are deterministic per seed") {
  const FbmSpec spec{.n = 1024, .hurst = 0.7, .seed = 5};
  CHECK(fgn(spec) == fgn(spec));
  CHECK(fgn(spec) != fgn({.n = 1024, .hurst = 0.7, .seed = 6}));
  const auto path = fbm(spec);
  const auto inc = fgn(spec);
  CHECK(path.back() == doctest::Approx(std::accumulate(inc.begin(), inc.end(), 0.0)));
  CHECK(gaussian_white_noise(100, 3) == gaussian_white_noise(100, 3));
  CHECK_THROWS_AS(fgn({.n = 1000, .hurst = 0.5}), Error);
  CHECK_THROWS_AS(fgn({.n = 1024, .hurst = 1.0}), Error);
  CHECK_THROWS_AS(gaussian_white_noise(0, 1), Error);
}
