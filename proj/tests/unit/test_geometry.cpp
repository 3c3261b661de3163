// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "ntmc/geometry.hpp"

using namespace ntmc;

TEST_SUITE("geometry") {
  TEST_CASE("interval exit times") {
    const Domain d = Domain::interval(1.0);
    CHECK(d.exit_time({0.0}, {1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.exit_time({0.5}, {-1.0}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(d.exit_time({0.0}, {4.0}) == doctest::Approx(0.25));
    CHECK_THROWS_AS(d.exit_time({2.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(d.exit_time({0.0}, {0.0}), DomainError);
  }

  TEST_CASE("rectangle exit time against bisection") {
    const Domain d = Domain::rectangle(1.0, 1.0);
    const double a = std::numbers::pi / 6.0;
    const Vec2 v{std::cos(a), std::sin(a)};
    double lo = 0.0, hi = 10.0;
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      (d.contains(advance({0.0, 0.0}, v, mid)) ? lo : hi) = mid;
    }
    const double k = d.exit_time({0.0, 0.0}, v);
    CHECK(std::abs(k - lo) < 1e-10);
    CHECK(std::abs(k - 1.0 / std::cos(a)) < 1e-12);
  }

  TEST_CASE("open domain membership") {
    const Domain d = Domain::interval(1.0);
    CHECK(d.contains({0.0}));
    CHECK_FALSE(d.contains({1.0}));
    CHECK_FALSE(d.contains({-1.0}));
    CHECK(d.in_closure({1.0}));
    const Domain sq = Domain::rectangle(1.0, 1.0);
    CHECK(sq.contains({0.999, 0.0}));
    CHECK_FALSE(sq.contains({1.0, 0.5}));
  }

  TEST_CASE("regions") {
    const CrossSectionField f = testing::four_rod();
    const Domain& d = f.domain();
    CHECK(d.region_of({0.5, 0.5}) == d.find_region("rod_ne"));
    CHECK(d.region_of({-0.5, -0.5}) == d.find_region("rod_sw"));
    CHECK(d.region_of({0.0, 0.0}) == 0);
    CHECK(d.find_region("nope") == -1);
    const Domain seg = Domain::interval(1.0, {0.0});
    CHECK(seg.region_of({-0.5}) == 0);
    CHECK(seg.region_of({0.5}) == 1);
    CHECK(seg.num_regions() == 2);
  }

  TEST_CASE("exit boundary and flow consistency") {
    const Domain d = testing::four_rod().domain();
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
      const Vec2 r{2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0};
      const double a = 2.0 * std::numbers::pi * rng.uniform();
      const Vec2 v{std::cos(a), std::sin(a)};
      const double k = d.exit_time(r, v);
      const double eps = 1e-9 * k;
      REQUIRE(d.contains(advance(r, v, k - eps)));
      REQUIRE_FALSE(d.contains(advance(r, v, k + eps)));
      const double s = k * rng.uniform();
      const double k2 = d.exit_time(advance(r, v, s), v);
      REQUIRE(std::abs(k2 + s - k) <= 1e-12 * std::max(1.0, k));
    }
  }

  TEST_CASE("convexity") {
    const Domain d = Domain::rectangle(2.0, 0.5);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const Vec2 a{4.0 * rng.uniform() - 2.0, rng.uniform() - 0.5};
      const Vec2 b{4.0 * rng.uniform() - 2.0, rng.uniform() - 0.5};
      REQUIRE(d.contains((a + b) * 0.5));
    }
  }

  TEST_CASE("ray pieces cover the flight and match crossings") {
    const Domain d = testing::four_rod().domain();
    const Vec2 r{-0.9, -0.9}, v{std::sqrt(0.5), std::sqrt(0.5)};
    const double T = d.exit_time(r, v);
    double covered = 0.0, last = 0.0;
    int pieces = 0;
    d.for_each_piece(r, v, T, [&](double s0, double s1, RegionId reg) {
      CHECK(s0 == doctest::Approx(last));
      CHECK(d.region_of(advance(r, v, 0.5 * (s0 + s1))) == reg);
      covered += s1 - s0;
      last = s1;
      ++pieces;
      return true;
    });
    CHECK(covered == doctest::Approx(T));
    // Diagonal passes through rod_sw and rod_ne.
    CHECK(pieces == 5);
  }

  TEST_CASE("inclusions must lie inside") {
    CHECK_THROWS(Domain::rectangle(1.0, 1.0, {{{0.9, 0.0}, 0.2, "x"}}));
    CHECK_THROWS(Domain::interval(-1.0));
  }

  TEST_CASE("velocity spaces") {
    const auto two = VelocitySpace::two_point(2.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const Vec2 v = two.sample(rng);
      REQUIRE(std::abs(std::abs(v.x) - 2.0) == 0.0);
      REQUIRE(two.member(v));
    }
    const auto circ = VelocitySpace::fixed_speed(1.5);
    for (int i = 0; i < 100; ++i) REQUIRE(std::abs(norm(circ.sample(rng)) - 1.5) < 1e-12);
    const auto ann = VelocitySpace::annulus(1.0, 2.0);
    for (int i = 0; i < 100; ++i) {
      const double s = norm(ann.sample(rng));
      REQUIRE(s >= 1.0);
      REQUIRE(s <= 2.0);
    }
  }
}
