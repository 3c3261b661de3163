// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntmc/htransform.hpp"
#include "ntmc/parallel.hpp"

namespace ntmc {

struct ParticleEnsemble {
  std::vector<PhaseState> particles;
  std::vector<double> log_weights;
  double log_total_mass = 0.0;
  double time = 0.0;

  std::size_t size() const { return particles.size(); }
};

// (sum w)^2 / sum w^2 from log weights; 0 when every weight is zero.
double effective_sample_size(std::span<const double> log_weights);
inline double effective_sample_size(const ParticleEnsemble& e) { return effective_sample_size(e.log_weights); }

// n draws with probabilities proportional to the weights. ExtinctionError
// when the total weight is zero.
std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t n, Rng& rng);

// Replaces the particles by a multinomial resample and resets the weights
// to uniform (log weight 0). log_total_mass is untouched.
void multinomial_resample(ParticleEnsemble& e, Rng& rng);

enum class SmcDynamics { nbp, nrw, hnrw };
SmcDynamics parse_smc_dynamics(const std::string& s);
std::string to_string(SmcDynamics d);

struct SmcOptions {
  std::size_t particles = 1000;
  double delta = 1.0;
  double horizon = 100.0;
  SmcDynamics dynamics = SmcDynamics::nbp;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
  // Resample only when ESS < threshold * n; 0 resamples every step.
  double ess_threshold = 0.0;
  std::uint64_t population_cap = 1'000'000;  // per particle and step (nbp)
  // Every particle starts here; uniform over D x V when empty.
  std::optional<PhaseState> start;
};

struct SmcStep {
  std::size_t step = 0;
  double time = 0.0;
  double log_mass = 0.0;
  double ess = 0.0;        // before resampling
  double ess_after = 0.0;  // after resampling (n when resampled)
  bool resampled = false;
  double lambda_hat_running = 0.0;
};

struct SmcResult {
  double lambda_hat = 0.0;
  bool extinct = false;
  std::vector<SmcStep> trace;
  ParticleEnsemble ensemble;
};

// Weighted ensemble propagated in steps of delta. nrw: weight e^{int beta};
// hnrw: weight e^{int (Lh/h + beta)} under the h-walk of `ht`; nbp: weight
// times the number of descendants alive at the end of the step, carrying
// one uniformly chosen descendant. lambda_hat = log_total_mass / time.
SmcResult smc_run(const CrossSectionField& field, const SmcOptions& opt, const HTransform* ht = nullptr);

// CSV rows step,time,log_mass,ess,lambda_hat_running.
void write_smc_csv_header(std::ostream& os);
void write_smc_csv(std::ostream& os, const SmcStep& s);

}  // namespace ntmc
