// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Generic thinning walker shared by the plain and h-transformed walks.
//
// Model interface:
//   bool thin(Vec2 r, Vec2 v, double s0, double s1, RegionId reg, Rng&, double& hit) const
//     scans [s0, s1) of the ray r + v s, all in region reg; on acceptance
//     stores the event parameter in `hit` and returns false.
//   Vec2 jump(Vec2 r, Vec2 v, RegionId reg, Rng&) const
//     draws the post-event velocity.
// Sink interface:
//   void scatter(double t, Vec2 r, Vec2 v_new)
//   void end(double t, Vec2 r, Vec2 v, bool exited)

#include <limits>

#include "ntmc/geometry.hpp"
#include "ntmc/rng.hpp"

namespace ntmc::detail {

template <class Model, class Sink>
void walk(const Model& model, const Domain& dom, Vec2 r, Vec2 v, double t, double horizon, Rng& rng, Sink& sink) {
  if (!dom.contains(r)) throw DomainError("walk: start position outside the domain");
  while (true) {
    const double kappa = dom.exit_time(r, v);
    const double room = horizon - t;
    const bool to_boundary = kappa <= room;
    const double T = to_boundary ? kappa : room;
    double hit = std::numeric_limits<double>::infinity();
    RegionId hit_reg = 0;
    dom.for_each_piece(r, v, T, [&](double s0, double s1, RegionId reg) {
      if (!model.thin(r, v, s0, s1, reg, rng, hit)) {
        hit_reg = reg;
        return false;
      }
      return true;
    });
    if (hit < T) {
      const double t_new = t + hit;
      const Vec2 r_new = advance(r, v, hit);
      if (t_new >= horizon) {
        sink.end(horizon, advance(r, v, room), v, false);
        return;
      }
      if (!dom.contains(r_new)) {
        // Rounding put the event on the boundary.
        sink.end(t + kappa, advance(r, v, kappa), v, true);
        return;
      }
      v = model.jump(r_new, v, hit_reg, rng);
      r = r_new;
      t = t_new;
      sink.scatter(t, r, v);
      continue;
    }
    sink.end(t + T, advance(r, v, T), v, to_boundary);
    return;
  }
}

}  // namespace ntmc::detail
