// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ntmc/nrw.hpp"

namespace ntmc {

constexpr std::uint64_t kDefaultPopulationCap = 10'000'000;

struct NbpTrajectory {
  NrwPath path;  // ends at exit, horizon or fission
  double birth = 0.0;
  std::int64_t parent = -1;
  int generation = 0;
  bool fissioned = false;
};

struct NbpForest {
  std::vector<NbpTrajectory> trajectories;
  double horizon = 0.0;
  bool valid = true;
};

struct FissionEvent {
  double time;
  Vec2 r;
  Vec2 v;
  std::vector<Vec2> children;
};

struct NbpOptions {
  std::uint64_t population_cap = kDefaultPopulationCap;
  // When false, a capped run returns the partial forest with valid = false.
  bool throw_on_cap = true;
};

// Fission clock along an already simulated sigma_s-pi_s path. Empty when
// the clock rings after t_end.
std::optional<FissionEvent> sample_fission_event(const NrwPath& path, const CrossSectionField& field, Rng& rng);

// Branching process as a materialised forest. Particle streams are keyed by
// (seed, lineage id) so the result does not depend on processing order.
NbpForest simulate_nbp(const CrossSectionField& field, std::span<const PhaseState> initial, double horizon,
                       std::uint64_t seed, const NbpOptions& opt = {});

std::vector<PhaseState> alive_at(const NbpForest& forest, double t);

// CSV rows cycle,particle,parent,birth,t,rx,ry,vx,vy,event.
void write_forest_csv_header(std::ostream& os);
void write_forest_csv(std::ostream& os, std::uint64_t cycle, const NbpForest& forest);

inline std::uint64_t child_lineage(std::uint64_t parent, std::uint64_t j) { return derive_seed(parent, j + 1); }
inline std::uint64_t root_lineage(std::uint64_t i) { return derive_seed(0x5eedULL, i); }

// Streaming simulation for large runs: nothing is stored; the visitor sees
// every flight segment. Scatter and fission race as competing clocks, which
// has the same law as running the scatter walk and trimming it at fission.
enum class SegmentEnd { scatter, fission, exit, horizon };

struct NbpVisitor {
  void birth(std::uint64_t, double, Vec2, Vec2) {}
  // Flight from (t0, r0) with velocity v until t1.
  void segment(double, Vec2, Vec2, double, SegmentEnd) {}
  void scatter(double, Vec2, Vec2) {}
  void fission(double, Vec2, Vec2, int) {}
};

struct NbpRunStats {
  std::uint64_t particles = 0;
  std::uint64_t scatters = 0;
  std::uint64_t fissions = 0;
  bool valid = true;
};

template <class Visitor>
NbpRunStats stream_nbp(const CrossSectionField& field, std::span<const PhaseState> initial, double horizon,
                       std::uint64_t seed, std::uint64_t cap, Visitor& vis);

namespace detail {
struct Pending {
  Vec2 r;
  Vec2 v;
  double t;
  std::uint64_t id;
};
}  // namespace detail

template <class Visitor>
NbpRunStats stream_nbp(const CrossSectionField& field, std::span<const PhaseState> initial, double horizon,
                       std::uint64_t seed, std::uint64_t cap, Visitor& vis) {
  if (initial.empty()) throw ConfigError("initial configuration is empty", "run.initial");
  const Domain& dom = field.domain();
  NbpRunStats stats;
  std::deque<detail::Pending> queue;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    if (!dom.contains(initial[i].r)) throw DomainError("initial particle outside the domain");
    queue.push_back({initial[i].r, initial[i].v, 0.0, root_lineage(i)});
    vis.birth(queue.back().id, 0.0, initial[i].r, initial[i].v);
  }
  stats.particles = initial.size();
  Rng rng;
  while (!queue.empty()) {
    detail::Pending p = queue.front();
    queue.pop_front();
    rng.reseed(derive_seed(seed, p.id));
    double es = rng.exponential();
    double ef = rng.exponential();
    Vec2 r = p.r, v = p.v;
    double t = p.t;
    while (true) {
      const double kappa = dom.exit_time(r, v);
      const double room = horizon - t;
      const bool to_boundary = kappa <= room;
      const double T = to_boundary ? kappa : room;
      double hit = T;
      int kind = 0;  // 0 none, 1 scatter, 2 fission
      RegionId hit_reg = 0;
      dom.for_each_piece(r, v, T, [&](double s0, double s1, RegionId reg) {
        const Material& m = field.material(reg);
        const double len = s1 - s0;
        const double ds = m.sigma_s > 0.0 ? es / m.sigma_s : std::numeric_limits<double>::infinity();
        const double df = m.sigma_f > 0.0 ? ef / m.sigma_f : std::numeric_limits<double>::infinity();
        if (ds < len || df < len) {
          kind = ds <= df ? 1 : 2;
          hit = s0 + std::min(ds, df);
          hit_reg = reg;
          if (kind == 1) ef -= m.sigma_f * (hit - s0);
          return false;
        }
        es -= m.sigma_s * len;
        ef -= m.sigma_f * len;
        return true;
      });
      const double t1 = t + hit;
      if (kind == 0 || t1 >= horizon) {
        const bool exited = kind == 0 && to_boundary;
        const double tend = kind == 0 ? t + T : horizon;
        vis.segment(t, r, v, tend, exited ? SegmentEnd::exit : SegmentEnd::horizon);
        break;
      }
      const Vec2 r1 = advance(r, v, hit);
      if (!dom.contains(r1)) {
        vis.segment(t, r, v, t + kappa, SegmentEnd::exit);
        break;
      }
      if (kind == 1) {
        vis.segment(t, r, v, t1, SegmentEnd::scatter);
        v = field.sample_scatter(v, rng);
        r = r1;
        t = t1;
        ++stats.scatters;
        vis.scatter(t, r, v);
        es = rng.exponential();
        continue;
      }
      vis.segment(t, r, v, t1, SegmentEnd::fission);
      ++stats.fissions;
      const double mass = field.material(hit_reg).fission_mass;
      int n = 0;
      if (mass > 0.0) n = std::poisson_distribution<int>(mass)(rng);
      vis.fission(t1, r1, v, n);
      for (int j = 0; j < n; ++j) {
        const Vec2 vc = field.sample_child(v, rng);
        const std::uint64_t cid = child_lineage(p.id, static_cast<std::uint64_t>(j));
        queue.push_back({r1, vc, t1, cid});
        vis.birth(cid, t1, r1, vc);
      }
      stats.particles += static_cast<std::uint64_t>(n);
      if (stats.particles > cap) {
        stats.valid = false;
        return stats;
      }
      break;
    }
  }
  return stats;
}

}  // namespace ntmc
