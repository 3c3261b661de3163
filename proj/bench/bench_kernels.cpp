// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
// Serial reference against the OpenMP kernels. Arg 0 is serial, 1 parallel.
#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "ntmc/estimators.hpp"
#include "ntmc/smc.hpp"

using namespace ntmc;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) == 0 ? "serial" : "parallel"); }

void BM_psi_br_slab(benchmark::State& st) {
  const auto f = slab::make_field(testing::critical_slab());
  RunOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) {
    const auto r = psi_br(f, WeightFunction::constant(1.0), 20.0, {{0.0}, {1.0}}, 200, o);
    benchmark::DoNotOptimize(r.value);
  }
  label(st);
}

void BM_psi_rw_four_rod(benchmark::State& st) {
  const auto f = testing::four_rod();
  RunOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) {
    const auto r = psi_rw(f, WeightFunction::constant(1.0), 5.0, {{0.0, 0.0}, {1.0, 0.0}}, 5000, o);
    benchmark::DoNotOptimize(r.value);
  }
  label(st);
}

void BM_psi_hrw_slab(benchmark::State& st) {
  const auto cfg = testing::subcritical_slab();
  const auto f = slab::make_field(cfg);
  const HTransform ht(f, HFunction::slab_h1(cfg.L, cfg.v0, cfg.sigma_s));
  RunOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) {
    const auto r = psi_hrw(ht, WeightFunction::box({-0.5, 0.5}), 5.0, {{0.0}, {1.0}}, 500, o);
    benchmark::DoNotOptimize(r.value);
  }
  label(st);
}

void BM_smc_slab(benchmark::State& st) {
  const auto f = slab::make_field(testing::critical_slab());
  SmcOptions o;
  o.particles = 500;
  o.horizon = 10.0;
  o.exec = exec_of(st);
  for (auto _ : st) {
    const auto r = smc_run(f, o);
    benchmark::DoNotOptimize(r.lambda_hat);
  }
  label(st);
}

}  // namespace

BENCHMARK(BM_psi_br_slab)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_psi_rw_four_rod)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_psi_hrw_slab)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_smc_slab)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
