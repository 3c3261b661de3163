// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "ntmc/smc.hpp"
#include "ntmc/stats.hpp"

using namespace ntmc;

namespace {
constexpr double kNinf = -std::numeric_limits<double>::infinity();
}

TEST_SUITE("smc") {
  TEST_CASE("effective sample size") {
    const std::vector<double> uni(10, 0.3);
    CHECK(effective_sample_size(uni) == doctest::Approx(10.0).epsilon(1e-14));
    std::vector<double> one(10, kNinf);
    one[3] = 0.0;
    CHECK(effective_sample_size(one) == 1.0);
    one[7] = 0.0;
    CHECK(effective_sample_size(one) == 2.0);
    CHECK(effective_sample_size(std::vector<double>(5, kNinf)) == 0.0);
  }

  TEST_CASE("multinomial draws") {
    Rng rng(1);
    const std::vector<double> logs{std::log(1.0), kNinf, std::log(3.0), std::log(4.0)};
    std::vector<double> copies(4, 0.0);
    const int reps = 10000;
    for (int i = 0; i < reps; ++i)
      for (std::size_t j : multinomial_indices(logs, 8, rng)) copies[j] += 1.0;
    CHECK(copies[1] == 0.0);
    const double w[] = {1.0 / 8, 0.0, 3.0 / 8, 4.0 / 8};
    for (int j : {0, 2, 3}) {
      const double mean = copies[j] / reps, expect = 8 * w[j];
      const double se = std::sqrt(8 * w[j] * (1 - w[j]) / reps);
      CHECK(std::abs(mean - expect) < 3.0 * se);
    }
    CHECK_THROWS_AS(multinomial_indices(std::vector<double>(3, kNinf), 3, rng), ExtinctionError);
  }

  TEST_CASE("uniform resampling is uniform") {
    Rng rng(2);
    constexpr std::size_t n = 20;
    std::vector<double> obs(n, 0.0);
    for (int i = 0; i < 5000; ++i)
      for (std::size_t j : multinomial_indices(std::vector<double>(n, 0.0), n, rng)) obs[j] += 1.0;
    const std::vector<double> expct(n, 5000.0);
    CHECK(stats::chi_square(obs, expct) < stats::chi_square_critical(n - 1));
  }

  TEST_CASE("resampling resets weights and keeps the weighted mean") {
    Rng rng(3);
    std::vector<double> before, after;
    for (int rep = 0; rep < 2000; ++rep) {
      ParticleEnsemble e;
      for (int i = 0; i < 10; ++i) {
        e.particles.push_back({{0.1 * i}, {1.0}});
        e.log_weights.push_back(std::log(1.0 + i));
      }
      double num = 0, den = 0;
      for (int i = 0; i < 10; ++i) {
        num += (1.0 + i) * 0.1 * i;
        den += 1.0 + i;
      }
      before.push_back(num / den);
      multinomial_resample(e, rng);
      CHECK(effective_sample_size(e) == doctest::Approx(10.0));
      double m = 0;
      for (const auto& p : e.particles) m += p.r.x / 10.0;
      after.push_back(m);
    }
    const auto a = stats::mean_se(after);
    CHECK(std::abs(a.mean - before[0]) < 3.0 * a.std_error);
  }

  TEST_CASE("critical slab, nbp dynamics") {
    const auto f = slab::make_field(testing::critical_slab());
    SmcOptions o;
    o.particles = 500;
    o.horizon = 40.0;
    o.seed = 3;
    const auto r = smc_run(f, o);
    CHECK(std::abs(r.lambda_hat) < 0.05);
    for (const auto& s : r.trace) {
      CHECK(s.resampled);
      CHECK(s.ess_after == doctest::Approx(500.0));
    }
    CHECK(r.trace.size() == 40);
  }

  TEST_CASE("subcritical slab, nrw dynamics") {
    const auto cfg = testing::subcritical_slab();
    const auto f = slab::make_field(cfg);
    SmcOptions o;
    o.particles = 500;
    o.horizon = 40.0;
    o.dynamics = SmcDynamics::nrw;
    o.seed = 4;
    const auto r = smc_run(f, o);
    CHECK(std::abs(r.lambda_hat - slab::eigen(cfg).lambda_star()) < 0.05);
  }

  TEST_CASE("conservative unit-weight dynamics have zero rate") {
    const auto f = CrossSectionField(Domain::interval(1e6), VelocitySpace::two_point(1.0), {{0.5, 0.0, 1.0}});
    const HTransform ht(f, HFunction::constant(1.0));
    SmcOptions o;
    o.particles = 200;
    o.horizon = 10.0;
    o.dynamics = SmcDynamics::hnrw;
    o.start = PhaseState{{0.0}, {1.0}};
    const auto r = smc_run(f, o, &ht);
    CHECK(std::abs(r.lambda_hat) < 1e-12);
  }

  TEST_CASE("ESS threshold skips resampling") {
    const auto f = slab::make_field(testing::critical_slab());
    SmcOptions o;
    o.particles = 200;
    o.horizon = 5.0;
    o.ess_threshold = 1e-9;
    const auto r = smc_run(f, o);
    for (const auto& s : r.trace) CHECK_FALSE(s.resampled);
  }

  TEST_CASE("serial and parallel agree") {
    const auto f = testing::four_rod();
    SmcOptions o;
    o.particles = 100;
    o.horizon = 3.0;
    o.seed = 9;
    o.exec = Exec::serial;
    const auto a = smc_run(f, o);
    o.exec = Exec::parallel;
    const auto b = smc_run(f, o);
    CHECK(a.lambda_hat == b.lambda_hat);
  }

  TEST_CASE("names") {
    CHECK(parse_smc_dynamics("hnrw") == SmcDynamics::hnrw);
    CHECK(to_string(SmcDynamics::nbp) == "nbp");
    CHECK_THROWS(parse_smc_dynamics("bogus"));
  }
}
