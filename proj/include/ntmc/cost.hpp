// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ntmc/nbp.hpp"
#include "ntmc/weight.hpp"

namespace ntmc {

struct CostCounters {
  std::uint64_t scatter_events = 0;
  std::uint64_t particles_created = 0;
  double weighted_cost = 0.0;  // C_t[f, g] (NBP) or C_t[f] (NRW)
  double compensator = 0.0;    // A_t

  CostCounters& operator+=(const CostCounters& o) {
    scatter_events += o.scatter_events;
    particles_created += o.particles_created;
    weighted_cost += o.weighted_cost;
    compensator += o.compensator;
    return *this;
  }
};

// C_t[f, g]: g summed over births up to t (roots included), f over scatter
// events up to t at the post-scatter state.
CostCounters track_cost_nbp(const NbpForest& forest, const WeightFunction& f, const WeightFunction& g, double t);

// A_t: integral of sigma_s pi_s[f] + sigma_f pi_f[g] over the particles
// alive before t. Roots are not compensated, so C_t - C_0 - A_t is the
// martingale.
double compensator_nbp(const NbpForest& forest, const CrossSectionField& field, const WeightFunction& f,
                       const WeightFunction& g, double t, const AngularQuadrature& quad = AngularQuadrature());

// C_t[f] along one NRW path, and its compensator, the integral of
// alpha pi[f] up to min(t, t_end).
double track_cost_nrw(const NrwPath& path, const WeightFunction& f, double t);
double compensator_nrw(const NrwPath& path, const CrossSectionField& field, const WeightFunction& f, double t,
                       const AngularQuadrature& quad = AngularQuadrature());

// Rate sigma_s pi_s[f] + sigma_f pi_f[g] at (r, v), and alpha pi[f].
double nbp_cost_rate(const CrossSectionField& field, const WeightFunction& f, const WeightFunction& g, Vec2 r, Vec2 v,
                     const AngularQuadrature& quad);
double nrw_cost_rate(const CrossSectionField& field, const WeightFunction& f, Vec2 r, Vec2 v,
                     const AngularQuadrature& quad);

// Streaming counterpart of track_cost_nbp / compensator_nbp for constant f
// and g, read off at every time of a sorted grid.
class CostGridVisitor : public NbpVisitor {
 public:
  CostGridVisitor(const CrossSectionField& field, double f, double g, std::vector<double> times);

  void birth(std::uint64_t, double t, Vec2, Vec2);
  void segment(double t0, Vec2 r0, Vec2 v, double t1, SegmentEnd end);
  void scatter(double t, Vec2, Vec2);

  const std::vector<double>& times() const { return times_; }
  // Per grid time.
  const std::vector<CostCounters>& counters() const { return out_; }

 private:
  const CrossSectionField* field_;
  double f_, g_;
  std::vector<double> times_;
  std::vector<CostCounters> out_;
};

// CSV rows t,cost_cpu,cost_mem,compensator.
void write_cost_csv_header(std::ostream& os);
void write_cost_csv(std::ostream& os, double t, double cpu, double mem, double compensator);

// (k, t) planner for the error bound
//   critical:      kappa1 t / k              + kappa0 / t^2
//   supercritical: kappa2 / k                + kappa0 / t^2
//   subcritical:   kappa3 e^{|lambda*| t}/k  + kappa0 / t^2
//   nrw:           kappa~1 e^{(lambda1 - 2 lambda*) t} / k + kappa0 / t^2
//   h_nrw:         kappa~2 e^{(lambda2 - 2 lambda*) t} / k + kappa0 / t^2
// with the expected cost per sample kappa4 t (critical),
// kappa4 e^{lambda* t}/lambda* (supercritical) and kappa4 otherwise.
enum class BudgetRegime { critical, supercritical, subcritical, nrw, h_nrw };
BudgetRegime parse_budget_regime(const std::string& s);
std::string to_string(BudgetRegime r);

struct BudgetInput {
  BudgetRegime regime = BudgetRegime::critical;
  double kappa0 = 1.0;
  double kappa = 1.0;        // kappa1 | kappa2 | kappa3 | kappa~1 | kappa~2
  double lambda_star = 0.0;
  double lambda_rate = 0.0;  // lambda1 | lambda2 for nrw / h_nrw
  double kappa4 = 1.0;
  double epsilon = 0.1;
};

struct BudgetPlan {
  double t = 0.0;
  double k_continuous = 0.0;
  std::uint64_t k = 0;  // ceil(k_continuous)
  double predicted_cost = 0.0;
  double t_asymptotic = 0.0;  // sqrt(2 kappa0)/eps (critical), sqrt(kappa0)/eps otherwise
  double error_bound = 0.0;   // at the integer k
};

BudgetPlan plan_budget(const BudgetInput& in);
double error_bound(const BudgetInput& in, double k, double t);

}  // namespace ntmc
