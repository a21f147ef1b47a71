#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "mfa/errors.hpp"
#include "mfa/rng.hpp"
#include "mfa/surrogate.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

using namespace mfa;

namespace {

std::vector<double> heavy_tailed(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  double ar = 0.0;
  for (double& v : x) {
    const double z = rng.normal();
    ar = 0.6 * ar + z * z * z;
    v = ar;
  }
  return x;
}

std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("seed derivation is a fixed splitmix stream") {
  // First outputs of SplitMix64 seeded with 0, as published with the generator.
  CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFULL);
  CHECK(derive_seed(0, 1) == 0x6E789E6AA1B965F4ULL);
  CHECK(derive_seed(0, 2) == 0x06C45D188009454FULL);
  CHECK(derive_seed(7, 3) != derive_seed(8, 3));
}

TEST_CASE("rng draws are reproducible and in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
  r.shuffle(std::span<int>(v));
  std::vector<int> s(v);
  std::sort(s.begin(), s.end());
  CHECK(s == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("amplitude residual agrees with a direct DFT") {
  const auto x = heavy_tailed(97, 1);
  const auto y = heavy_tailed(97, 2);
  CHECK(amplitude_spectrum_residual(x, y) == doctest::Approx(oracle::dft_residual(x, y)).epsilon(1e-10));
  CHECK(amplitude_spectrum_residual(x, x) == 0.0);
  std::vector<double> rev(x.rbegin(), x.rend());
  CHECK(amplitude_spectrum_residual(rev, x) < 1e-12);
}

TEST_CASE("IAAFT preserves the sorted values bit for bit") {
  for (std::size_t n : {8u, 255u, 1024u, 3001u}) {
    const auto x = heavy_tailed(n, n);
    const auto r = iaaft(x, {.max_iterations = 200, .spectrum_tolerance = 1e-8, .rng_seed = 9});
    CHECK(sorted_copy(r.values) == sorted_copy(x));
    CHECK(r.iterations >= 1);
    CHECK(r.spectrum_residual == doctest::Approx(oracle::dft_residual(r.values, x)).epsilon(1e-8));
  }
}

TEST_CASE("IAAFT preserves ties") {
  std::vector<double> x(64);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>((i * 7) % 5);
  const auto r = iaaft(x, {.max_iterations = 100, .spectrum_tolerance = 1e-8, .rng_seed = 3});
  CHECK(sorted_copy(r.values) == sorted_copy(x));
}

TEST_CASE("IAAFT improves on a plain shuffle and reaches a stop rule") {
  const auto x = heavy_tailed(2048, 4);
  std::vector<double> shuffled(x);
  Rng(5).shuffle(std::span<double>(shuffled));
  const double shuffle_residual = amplitude_spectrum_residual(shuffled, x);
  const auto r = iaaft(x, {.max_iterations = 1000, .spectrum_tolerance = 1e-8, .rng_seed = 5});
  CHECK(r.spectrum_residual < 0.25 * shuffle_residual);
  CHECK(r.stop != IaaftStop::MaxIterations);
}

TEST_CASE("a full-period sinusoid converges within five iterations") {
  std::vector<double> x(256);
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = std::sin(2.0 * std::numbers::pi * 4.0 * t / 256.0);
  const auto r = iaaft(x, {.max_iterations = 1000, .spectrum_tolerance = 1e-8, .rng_seed = 1});
  CHECK(r.iterations <= 5);
  CHECK(r.spectrum_residual <= 1e-8);
  CHECK(r.stop == IaaftStop::SpectrumTolerance);
}

TEST_CASE("IAAFT input errors") {
  CHECK_THROWS_AS(iaaft(std::vector<double>(7, 1.0), {}), Error);
  try {
    iaaft(std::vector<double>(16, 2.0), {});
    FAIL("constant series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConstantSeries);
  }
  try {
    iaaft(std::vector<double>{1, 2, 3, 4, 5, 6, 7}, {});
    FAIL("short series accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthTooShort);
  }
}

TEST_CASE("ensemble members depend only on (base seed, index)") {
  const auto x = heavy_tailed(512, 6);
  EnsembleOptions opts{.size = 6, .base_seed = 77, .max_iterations = 50, .workers = 1};
  const auto one = make_ensemble(x, opts, "x");
  opts.workers = 3;
  const auto three = make_ensemble(x, opts, "x");
  CHECK(one.surrogates == three.surrogates);
  CHECK(one.seeds == three.seeds);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one.seeds[i] == derive_seed(77, i));
    const auto solo = iaaft(x, {.max_iterations = 50, .spectrum_tolerance = 1e-8, .rng_seed = one.seeds[i]});
    CHECK(solo.values == one.surrogates[i]);
  }
  CHECK(one.surrogates[0] != one.surrogates[1]);
}

TEST_CASE("cancelled ensembles throw Cancelled") {
  const auto x = heavy_tailed(256, 1);
  std::atomic<bool> stop{true};
  EnsembleOptions opts{.size = 4, .workers = 1, .cancel = &stop};
  try {
    make_ensemble(x, opts);
    FAIL("cancel ignored");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Cancelled);
  }
}

TEST_CASE("ensemble export") {
  ScratchDir dir("surrogate");
  const auto x = heavy_tailed(32, 2);
  const auto ens = make_ensemble(x, {.size = 3, .base_seed = 1, .max_iterations = 20, .workers = 1}, "lbl");
  write_ensemble(ens, dir.path() / "s.csv", dir.path() / "m.json");
  const std::string csv = slurp(dir.path() / "s.csv");
  CHECK(csv.rfind("surrogate,t,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 32);
  const auto doc = nlohmann::json::parse(slurp(dir.path() / "m.json"));
  CHECK(doc.dump().find("lbl") != std::string::npos);
}

TEST_CASE("worker resolution") {
  CHECK(resolve_workers(4, 2) == 2);
  CHECK(resolve_workers(1, 100) == 1);
  CHECK(resolve_workers(0, 100) >= 1);
}
