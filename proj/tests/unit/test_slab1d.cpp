// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "ntmc/slab1d.hpp"

using namespace ntmc;
using namespace ntmc::slab;

TEST_SUITE("slab1d") {
  TEST_CASE("fixed points") {
    CHECK(solve_fixed_point(1.0) == 0.0);
    const double x2 = solve_fixed_point(2.0);
    CHECK(x2 == doctest::Approx(2.1773).epsilon(1e-4));
    CHECK(std::abs(fixed_point_residual(2.0, x2)) < 1e-12);
    const double xh = solve_fixed_point(0.5);
    CHECK(xh == doctest::Approx(1.8955).epsilon(1e-4));
    CHECK(xh < std::acos(-1.0));
    CHECK(std::abs(fixed_point_residual(0.5, xh)) < 1e-12);
    CHECK_THROWS(solve_fixed_point(0.0));
  }

  TEST_CASE("critical slab is exact") {
    const SlabEigen e = eigen(testing::critical_slab());
    CHECK(e.regime() == Regime::theta_eq_1);
    CHECK(e.lambda_star() == 0.0);
    for (double r : {-0.9, -0.3, 0.0, 0.4, 0.99}) {
      CHECK(e.phi(r, 1.0) == doctest::Approx(1.0 - r).epsilon(1e-15));
      CHECK(e.phi(r, -1.0) == doctest::Approx(1.0 + r).epsilon(1e-15));
      CHECK(e.phi_tilde(r, 1.0) == doctest::Approx(1.0 + r).epsilon(1e-15));
    }
    CHECK(e.phi_phitilde() == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    CHECK(verify_eigen(e) < 1e-9);
  }

  TEST_CASE("theta = 2") {
    const SlabConfig cfg{1.0, 2.0, 0.5, 1.0};
    const SlabEigen e = eigen(cfg);
    CHECK(e.regime() == Regime::theta_gt_1);
    const double x = solve_fixed_point(2.0);
    CHECK(e.lambda_star() == doctest::Approx(0.5 - std::sqrt(0.25 + x * x)).epsilon(1e-12));
    CHECK(e.lambda_star() == doctest::Approx(-1.7339).epsilon(1e-4));
    CHECK(verify_eigen(e) < 1e-6);
  }

  TEST_CASE("normalisation, boundary values and positivity") {
    for (const SlabConfig& cfg : {testing::critical_slab(), testing::supercritical_slab(),
                                  testing::subcritical_slab(), SlabConfig{1.0, 2.0, 0.5, 1.0}}) {
      const SlabEigen e = eigen(cfg);
      CHECK(e.phi(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(e.phi_tilde(0.0, -1.0) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(e.phi(cfg.L, 1.0)) < 1e-12);
      CHECK(std::abs(e.phi(-cfg.L, -1.0)) < 1e-12);
      for (int i = 1; i < 100; ++i) REQUIRE(e.profile(-cfg.L + 2.0 * cfg.L * i / 100.0) > 0.0);
      CHECK(verify_eigen(e) < 1e-6);
    }
  }

  TEST_CASE("regime continuity at theta = 1") {
    const double l0 = eigen(testing::critical_slab()).lambda_star();
    for (double d : {1e-6, -1e-6}) {
      const SlabConfig cfg{1.0, 1.0 + d, 0.5, 1.0};
      CHECK(std::abs(eigen(cfg).lambda_star() - l0) < 1e-4);
    }
  }

  TEST_CASE("inner products") {
    const SlabEigen e = eigen(testing::critical_slab());
    CHECK(inner_phitilde(e, [](double, double) { return 1.0; }) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(inner_phitilde(e, [&](double r, double v) { return e.phi(r, v); }) ==
          doctest::Approx(8.0 / 3.0).epsilon(1e-10));
  }

  TEST_CASE("variance constants") {
    const SlabEigen e = eigen(testing::critical_slab());
    const auto zero = variance_constants(e, [](double, double) { return 0.0; }, 0.0, 1.0);
    CHECK(zero.C0 == 0.0);
    CHECK(zero.C1 == 0.0);
    // With phi~ scaled so that <phi, phi~> = 1 and g = phi: C1 = 4 sigma_f <phi^2, phi~> phi(r, v).
    const auto c = variance_constants(e, [&](double r, double v) { return e.phi(r, v); }, 0.0, 1.0, true);
    const double n = 8.0 / 3.0;
    // <phi^2, phi~> = 2 * int (1-r)^2 (1+r) dr over (-1, 1) = 2 * 4/3.
    const double expected = 4.0 * 1.0 * (8.0 / 3.0) / n * 1.0;
    CHECK(c.C1 > 0.0);
    CHECK(c.C1 == doctest::Approx(expected).epsilon(1e-6));
  }

  TEST_CASE("cost constant") {
    const SlabEigen e = eigen(testing::critical_slab());
    // (sigma_s f + 2 sigma_f g) <1, phi~> phi(r, v) / <phi, phi~>.
    CHECK(cost_constant(e, 1.0, 0.0, 0.0, 1.0) == doctest::Approx(0.5 * 4.0 / (8.0 / 3.0)));
    CHECK(cost_constant(e, 0.0, 1.0, 0.0, 1.0) == doctest::Approx(2.0 * 4.0 / (8.0 / 3.0)));
  }

  TEST_CASE("invalid configs") {
    CHECK_THROWS((SlabConfig{-1.0, 1.0, 0.5, 1.0}).validate());
    CHECK_THROWS((SlabConfig{1.0, 1.0, 0.0, 1.0}).validate());
  }
}
