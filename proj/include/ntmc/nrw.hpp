// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "ntmc/xsection.hpp"

namespace ntmc {

// Post-event state. events[0] is the start; later entries are scatters with
// the new velocity.
struct PathEvent {
  double t;
  Vec2 r;
  Vec2 v;
};

struct NrwPath {
  std::vector<PathEvent> events;
  double t_end = 0.0;
  bool exited = false;

  double t_start() const { return events.front().t; }
  std::size_t scatter_count() const { return events.size() - 1; }
  Vec2 end_position() const;
  // Velocity of the last segment.
  Vec2 end_velocity() const { return events.back().v; }
};

struct PhaseState {
  Vec2 r;
  Vec2 v;
};

// alpha_pi: full rate alpha with the combined kernel pi. scatter_only:
// rate sigma_s with pi_s (the motion of one NBP particle).
enum class NrwRates { alpha_pi, scatter_only };

NrwPath simulate_nrw(const CrossSectionField& field, NrwRates rates, Vec2 r0, Vec2 v0, double t_start, double horizon,
                     Rng& rng);

// Time to the next event along r + v s at the given rates, or +inf when the
// ray leaves the domain (or passes max_time) first.
double sample_scatter_time(const CrossSectionField& field, NrwRates rates, Vec2 r, Vec2 v, Rng& rng,
                           double max_time = std::numeric_limits<double>::infinity());

// State at time s, t_start <= s < t_end; s == t_end is allowed for paths
// truncated at the horizon. OutOfLifeError otherwise.
PhaseState trajectory_at(const NrwPath& path, double s);

// Exact integral of the piecewise-constant beta along the path over
// [t_start, t]. OutOfLifeError for t > t_end.
double beta_integral(const NrwPath& path, const CrossSectionField& field, double t);

// Calls f(t0, t1, r0, v, region) over (segment x region) pieces up to t.
template <class F>
void for_each_path_piece(const NrwPath& path, const Domain& dom, double t, F&& f);

// CSV rows cycle,t,rx,ry,vx,vy,event.
void write_events_csv_header(std::ostream& os);
void write_events_csv(std::ostream& os, std::uint64_t cycle, const NrwPath& path);

namespace detail {

struct PlainModel {
  const CrossSectionField* field;
  NrwRates rates;

  double rate(RegionId reg) const {
    const Material& m = field->material(reg);
    return rates == NrwRates::alpha_pi ? m.alpha() : m.sigma_s;
  }

  bool thin(Vec2, Vec2, double s0, double s1, RegionId reg, Rng& rng, double& hit) const {
    const double b = rate(reg);
    if (!(b > 0.0)) return true;
    double s = s0;
    while (true) {
      s += rng.exponential() / b;
      if (s >= s1) return true;
      // Tight bound: acceptance is certain, the draw keeps streams aligned
      // with the h-transformed walker.
      const double u = rng.uniform();
      if (u * b < b) {
        hit = s;
        return false;
      }
    }
  }

  Vec2 jump(Vec2, Vec2 v, RegionId reg, Rng& rng) const {
    return rates == NrwRates::alpha_pi ? field->sample_pi(reg, v, rng) : field->sample_scatter(v, rng);
  }
};

struct PathSink {
  NrwPath* path;
  void scatter(double t, Vec2 r, Vec2 v) { path->events.push_back({t, r, v}); }
  void end(double t, Vec2, Vec2, bool exited) {
    path->t_end = t;
    path->exited = exited;
  }
};

}  // namespace detail

template <class F>
void for_each_path_piece(const NrwPath& path, const Domain& dom, double t, F&& f) {
  for (std::size_t k = 0; k < path.events.size(); ++k) {
    const PathEvent& e = path.events[k];
    if (e.t >= t) break;
    const double t1 = std::min(k + 1 < path.events.size() ? path.events[k + 1].t : path.t_end, t);
    dom.for_each_piece(e.r, e.v, t1 - e.t, [&](double s0, double s1, RegionId reg) {
      f(e.t + s0, e.t + s1, advance(e.r, e.v, s0), e.v, reg);
      return true;
    });
  }
}

}  // namespace ntmc
