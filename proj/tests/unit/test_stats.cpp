// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ntmc/rng.hpp"
#include "ntmc/stats.hpp"

using namespace ntmc;

TEST_SUITE("stats") {
  TEST_CASE("rng is reproducible and stream keyed") {
    Rng a(42), b(42), c(derive_seed(42, 1));
    for (int i = 0; i < 100; ++i) REQUIRE(a() == b());
    CHECK(a() != c());
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    CHECK(derive_seed(1, 2, 3) == derive_seed(derive_seed(1, 2), 3));
  }

  TEST_CASE("uniform stays in the open interval") {
    Rng r(0);
    for (int i = 0; i < 100000; ++i) {
      const double u = r.uniform();
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }

  TEST_CASE("exponential passes KS") {
    Rng r(9);
    std::vector<double> x(100000);
    for (auto& e : x) e = r.exponential() / 2.0;
    const double d = stats::ks_statistic(x, [](double s) { return 1.0 - std::exp(-2.0 * s); });
    CHECK(d < stats::ks_critical_1pct(x.size()));
  }

  TEST_CASE("mean and standard error") {
    const std::vector<double> x{1, 2, 3, 4};
    const auto m = stats::mean_se(x);
    CHECK(m.mean == 2.5);
    CHECK(m.variance == doctest::Approx(5.0 / 3.0));
    CHECK(m.std_error == doctest::Approx(std::sqrt(5.0 / 12.0)));
  }

  TEST_CASE("log-space mean survives overflow") {
    const double ninf = -std::numeric_limits<double>::infinity();
    const std::vector<double> logs{1000.0, 1000.0, ninf, ninf};
    const auto m = stats::log_mean_se(logs);
    CHECK(m.log_mean == doctest::Approx(1000.0 + std::log(0.5)));
    CHECK(m.rel_std_error == doctest::Approx(std::sqrt(1.0 / 3.0) * 2.0 / 2.0));
    const std::vector<double> zeros{ninf, ninf};
    CHECK(stats::log_mean_se(zeros).log_mean == ninf);
    CHECK(stats::log_sum_exp(logs) == doctest::Approx(1000.0 + std::log(2.0)));
  }

  TEST_CASE("pairwise sum is exact on integers") {
    std::vector<double> x(1000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i);
    CHECK(stats::pairwise_sum(x) == 499500.0);
  }

  TEST_CASE("least squares and correlation") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto f = stats::ols(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(stats::pearson(x, y) == doctest::Approx(1.0));
    const std::vector<double> z{7, 5, 3, 1};
    CHECK(stats::pearson(x, z) == doctest::Approx(-1.0));
  }

  TEST_CASE("critical values") {
    CHECK(stats::chi_square_critical(1) == doctest::Approx(6.635).epsilon(1e-3));
    CHECK(stats::ks_critical_1pct(10000) == doctest::Approx(1.6276 / 100.0).epsilon(1e-3));
  }
}
