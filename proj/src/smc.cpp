// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "ntmc/nbp.hpp"
#include "ntmc/stats.hpp"

namespace ntmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Stream tags, so resampling and descendant choice never share a stream
// with propagation.
constexpr std::uint64_t kResampleTag = 0x7265736d706cULL;
constexpr std::uint64_t kPickTag = 0x7069636bULL;
constexpr std::uint64_t kInitTag = 0x696e6974ULL;
}  // namespace

double effective_sample_size(std::span<const double> log_weights) {
  double m = kNegInf;
  for (double l : log_weights) m = std::max(m, l);
  if (m == kNegInf) return 0.0;
  std::vector<double> w(log_weights.size()), w2(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - m);
    w2[i] = w[i] * w[i];
  }
  const double s1 = stats::pairwise_sum(w);
  return s1 * s1 / stats::pairwise_sum(w2);
}

std::vector<std::size_t> multinomial_indices(std::span<const double> log_weights, std::size_t n, Rng& rng) {
  double m = kNegInf;
  for (double l : log_weights) m = std::max(m, l);
  if (m == kNegInf) throw ExtinctionError("resampling with zero total weight");
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - m);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

void multinomial_resample(ParticleEnsemble& e, Rng& rng) {
  const auto idx = multinomial_indices(e.log_weights, e.size(), rng);
  std::vector<PhaseState> next(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) next[i] = e.particles[idx[i]];
  e.particles = std::move(next);
  std::fill(e.log_weights.begin(), e.log_weights.end(), 0.0);
}

SmcDynamics parse_smc_dynamics(const std::string& s) {
  if (s == "nbp") return SmcDynamics::nbp;
  if (s == "nrw") return SmcDynamics::nrw;
  if (s == "hnrw" || s == "h_nrw") return SmcDynamics::hnrw;
  throw ConfigError("unknown dynamics '" + s + "'", "smc.dynamics");
}

std::string to_string(SmcDynamics d) {
  switch (d) {
    case SmcDynamics::nbp: return "nbp";
    case SmcDynamics::nrw: return "nrw";
    case SmcDynamics::hnrw: return "hnrw";
  }
  return "?";
}

namespace {

struct Moved {
  PhaseState state;
  double log_increment;
};

// Alive descendants at the horizon; keeps one uniformly (reservoir).
// A particle that rounding leaves on the boundary at the step end would exit
// at once, so it does not count as alive.
struct Reservoir : NbpVisitor {
  const Domain* dom = nullptr;
  Rng pick;
  std::uint64_t seen = 0;
  PhaseState chosen{};
  void segment(double t0, Vec2 r0, Vec2 v, double t1, SegmentEnd end) {
    if (end != SegmentEnd::horizon) return;
    const Vec2 r = advance(r0, v, t1 - t0);
    if (!dom->contains(r)) return;
    ++seen;
    if (seen == 1 || pick.uniform() * static_cast<double>(seen) < 1.0) chosen = {r, v};
  }
};

PhaseState sample_uniform(const CrossSectionField& field, Rng& rng) {
  const Domain& dom = field.domain();
  while (true) {
    const double x = (2.0 * rng.uniform() - 1.0) * dom.half_x();
    const double y = dom.dim() == 2 ? (2.0 * rng.uniform() - 1.0) * dom.half_y() : 0.0;
    const Vec2 r{x, y};
    if (dom.contains(r)) return {r, field.velocity().sample(rng)};
  }
}

}  // namespace

SmcResult smc_run(const CrossSectionField& field, const SmcOptions& opt, const HTransform* ht) {
  if (opt.particles < 2) throw ConfigError("need at least two particles", "smc.particles");
  if (!(opt.delta > 0.0) || !std::isfinite(opt.delta)) throw ConfigError("must be positive", "smc.delta");
  if (!(opt.horizon > 0.0) || !std::isfinite(opt.horizon)) throw ConfigError("must be positive", "run.t");
  if (!(opt.ess_threshold >= 0.0 && opt.ess_threshold <= 1.0))
    throw ConfigError("must lie in [0, 1]", "smc.ess_threshold");
  if (opt.dynamics == SmcDynamics::hnrw && !ht) throw ConfigError("hnrw dynamics need an h function", "h");
  if (opt.start && !field.domain().contains(opt.start->r)) throw DomainError("initial position outside the domain");

  const std::size_t n = opt.particles;
  SmcResult res;
  ParticleEnsemble& ens = res.ensemble;
  ens.particles.resize(n);
  ens.log_weights.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (opt.start) {
      ens.particles[i] = *opt.start;
    } else {
      Rng rng(derive_seed(opt.seed, kInitTag, i));
      ens.particles[i] = sample_uniform(field, rng);
    }
  }

  const auto steps = static_cast<std::size_t>(std::ceil(opt.horizon / opt.delta - 1e-9));
  for (std::size_t s = 0; s < steps; ++s) {
    const double t0 = ens.time;
    const double t1 = std::min(opt.horizon, t0 + opt.delta);
    const double dt = t1 - t0;
    auto moved = map_cycles<Moved>(n, opt.exec, [&](std::size_t i) -> Moved {
      const PhaseState p = ens.particles[i];
      const std::uint64_t key = derive_seed(opt.seed, s, i);
      Rng rng(key);
      switch (opt.dynamics) {
        case SmcDynamics::nrw: {
          const NrwPath path = simulate_nrw(field, NrwRates::alpha_pi, p.r, p.v, 0.0, dt, rng);
          if (path.exited) return {p, kNegInf};
          const PhaseState end = trajectory_at(path, dt);
          if (!field.domain().contains(end.r)) return {p, kNegInf};
          return {end, beta_integral(path, field, dt)};
        }
        case SmcDynamics::hnrw: {
          const NrwPath path = simulate_hnrw(*ht, p.r, p.v, 0.0, dt, rng);
          if (path.exited) return {p, kNegInf};
          const PhaseState end = trajectory_at(path, dt);
          if (!field.domain().contains(end.r)) return {p, kNegInf};
          // Potential only: the h-ratio telescopes out of the growth rate.
          const double lw = ht->log_weight(path, dt, ht->h_at(end.r, end.v)) - std::log(ht->h_at(p.r, p.v));
          return {end, lw};
        }
        case SmcDynamics::nbp: {
          Reservoir vis;
          vis.dom = &field.domain();
          vis.pick.reseed(derive_seed(key, kPickTag));
          const PhaseState roots[1] = {p};
          const NbpRunStats st = stream_nbp(field, roots, dt, key, opt.population_cap, vis);
          if (!st.valid) throw ResourceError("population cap exceeded during an SMC step");
          if (vis.seen == 0) return {p, kNegInf};
          return {vis.chosen, std::log(static_cast<double>(vis.seen))};
        }
      }
      return {p, kNegInf};
    });
    for (std::size_t i = 0; i < n; ++i) {
      ens.particles[i] = moved[i].state;
      ens.log_weights[i] += moved[i].log_increment;
    }
    ens.time = t1;

    SmcStep rec;
    rec.step = s + 1;
    rec.time = t1;
    // Normalise so the weights average to one; the mean goes into the mass.
    std::vector<double> lw(ens.log_weights);
    const double lse = stats::log_sum_exp(lw);
    if (lse == kNegInf) {
      res.extinct = true;
      rec.log_mass = kNegInf;
      rec.lambda_hat_running = kNegInf;
      res.trace.push_back(rec);
      res.lambda_hat = kNegInf;
      return res;
    }
    const double inc = lse - std::log(static_cast<double>(n));
    ens.log_total_mass += inc;
    for (double& l : ens.log_weights) l -= inc;
    rec.ess = effective_sample_size(ens.log_weights);
    if (opt.ess_threshold == 0.0 || rec.ess < opt.ess_threshold * static_cast<double>(n)) {
      Rng rrng(derive_seed(opt.seed, kResampleTag, s));
      multinomial_resample(ens, rrng);
      rec.resampled = true;
    }
    rec.ess_after = effective_sample_size(ens.log_weights);
    rec.log_mass = ens.log_total_mass;
    rec.lambda_hat_running = ens.log_total_mass / t1;
    res.trace.push_back(rec);
  }
  res.lambda_hat = ens.log_total_mass / ens.time;
  return res;
}

void write_smc_csv_header(std::ostream& os) { os << "step,time,log_mass,ess,lambda_hat_running\n"; }

void write_smc_csv(std::ostream& os, const SmcStep& s) {
  os << fmt::format("{},{},{},{},{}\n", s.step, s.time, s.log_mass, s.ess, s.lambda_hat_running);
}

}  // namespace ntmc
