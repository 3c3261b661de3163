// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ntmc/cost.hpp"
#include "ntmc/htransform.hpp"
#include "ntmc/parallel.hpp"
#include "ntmc/stats.hpp"
#include "ntmc/weight.hpp"

namespace ntmc {

struct EstimatorResult {
  std::string estimator;
  double value = 0.0;
  double log_value = 0.0;  // -inf when value = 0
  double std_error = 0.0;
  double rel_std_error = 0.0;
  std::uint64_t k = 0;
  double t = 0.0;
  std::uint64_t survivors = 0;  // cycles with a nonzero contribution
  CostCounters cost;            // summed over cycles, f = g = 1
};

// Cycle i draws from streams keyed by (seed, i); results are identical for
// serial and parallel execution.
struct RunOptions {
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
  std::uint64_t population_cap = kDefaultPopulationCap;  // per forest
};

// Branching estimator: mean of <g, X_t> over k forests.
EstimatorResult psi_br(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                       std::uint64_t k, const RunOptions& opt);
// Several weights and times off the same forests; result[g][time].
std::vector<std::vector<EstimatorResult>> psi_br_grid(const CrossSectionField& field,
                                                      std::span<const WeightFunction> gs,
                                                      std::span<const double> times, PhaseState start,
                                                      std::uint64_t k, const RunOptions& opt);

// Random-walk estimator: mean of exp(beta_scale * int beta) g^g_power
// 1(t < t_end) over k paths. beta_scale = g_power = 2 gives the second
// moment.
EstimatorResult psi_rw(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                       std::uint64_t k, const RunOptions& opt);
std::vector<EstimatorResult> psi_rw_grid(const CrossSectionField& field, const WeightFunction& g,
                                         std::span<const double> times, PhaseState start, std::uint64_t k,
                                         const RunOptions& opt, double beta_scale = 1.0, double g_power = 1.0);

// Importance-sampled walk estimator. ConfigError unless g <= C h.
EstimatorResult psi_hrw(const HTransform& ht, const WeightFunction& g, double t, PhaseState start, std::uint64_t k,
                        const RunOptions& opt);
// Per-path log weights behind psi_hrw (-inf for zero contributions).
std::vector<double> hrw_log_weights(const HTransform& ht, const WeightFunction& g, double t, PhaseState start,
                                    std::uint64_t k, const RunOptions& opt);

// lambda = log(value)/t. Undefined when value = 0; the standard error is
// the delta-method approximation rel_std_error / t.
struct LambdaEstimate {
  bool defined = false;
  double lambda = 0.0;
  double std_error = 0.0;
  std::uint64_t survivors = 0;
};
LambdaEstimate lambda_estimate(const EstimatorResult& r);

struct RatioEstimate {
  bool defined = false;
  double value = 0.0;
};

// psi_br[g](t, state) / psi_br[g](t, reference), common random numbers by
// default.
RatioEstimate eigenfunction_ratio(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState state,
                                  PhaseState reference, std::uint64_t k, const RunOptions& opt, bool crn = true);

// psi_br[g] / psi_br[1] on shared forests.
RatioEstimate left_inner(const CrossSectionField& field, const WeightFunction& g, double t, PhaseState start,
                         std::uint64_t k, const RunOptions& opt);

// Position grid x velocity sectors. 1D uses ny = 1; sector s covers
// velocity angles [2 pi s / sectors, 2 pi (s + 1) / sectors).
struct PhaseBins {
  int nx = 40;
  int ny = 1;
  int sectors = 1;

  int size() const { return nx * ny * sectors; }
  int index(int ix, int iy, int sector) const { return (ix * ny + iy) * sectors + sector; }
  int locate(const Domain& dom, Vec2 r, Vec2 v) const;
};

struct Histogram {
  PhaseBins bins;
  std::vector<double> values;  // by PhaseBins::index
  double t = 0.0;
  int M = 0;
  std::uint64_t k = 0;

  double total() const;
  double at(int ix, int iy, int sector) const { return values[static_cast<std::size_t>(bins.index(ix, iy, sector))]; }
};

// (1/(kM)) sum over forests and sample times m t / M, m = 1..M, of the
// number of particles in each bin.
Histogram occupation_histogram(const CrossSectionField& field, const PhaseBins& bins, double t, int M,
                               PhaseState start, std::uint64_t k, const RunOptions& opt);

// CSV rows bin_x,bin_y,sector,value.
void write_heatmap_csv(std::ostream& os, const Histogram& h);

// W_t = e^{-lambda t} <phi, X_t> / phi(start).
struct MartingalePoint {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
};
std::vector<MartingalePoint> martingale_diag(const CrossSectionField& field, const WeightFunction& phi, double lambda,
                                             std::span<const double> times, PhaseState start, std::uint64_t k,
                                             const RunOptions& opt);

// Growth rates of psi_rw[g] and of its second moment (potential 2 beta,
// weight g^2) by least squares over the grid, on shared paths.
struct SecondMomentRate {
  double lambda1 = 0.0;
  double lambda = 0.0;
  double beta_min = 0.0;
  double beta_max = 0.0;

  double lower_bound() const { return std::max(2.0 * lambda, lambda + beta_min); }
  double upper_bound() const { return lambda + beta_max; }
  bool within(double tol) const { return lambda1 >= lower_bound() - tol && lambda1 <= upper_bound() + tol; }
};
SecondMomentRate second_moment_rate(const CrossSectionField& field, const WeightFunction& g,
                                    std::span<const double> times, PhaseState start, std::uint64_t k,
                                    const RunOptions& opt);

// Per-time cycle means of the cost counters and of C_t - C_0 - A_t.
struct CostPoint {
  double t = 0.0;
  stats::MeanSe cost;
  stats::MeanSe cpu;       // scatter count
  stats::MeanSe mem;       // particles created
  stats::MeanSe residual;  // C_t - C_0 - A_t
  stats::MeanSe compensator;
};
// NBP with constant f, g (streaming).
std::vector<CostPoint> nbp_cost_grid(const CrossSectionField& field, double f, double g, std::span<const double> times,
                                     PhaseState start, std::uint64_t k, const RunOptions& opt);
// NRW under (alpha, pi), any bounded f.
std::vector<CostPoint> nrw_cost_grid(const CrossSectionField& field, const WeightFunction& f,
                                     std::span<const double> times, PhaseState start, std::uint64_t k,
                                     const RunOptions& opt);

// CSV rows estimator,t,k,value,std_error,survivors,lambda_hat.
void write_estimator_csv_header(std::ostream& os);
void write_estimator_csv(std::ostream& os, const EstimatorResult& r);

}  // namespace ntmc
