// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/nrw.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ntmc/walk.hpp"

namespace ntmc {

Vec2 NrwPath::end_position() const {
  const PathEvent& e = events.back();
  return advance(e.r, e.v, t_end - e.t);
}

NrwPath simulate_nrw(const CrossSectionField& field, NrwRates rates, Vec2 r0, Vec2 v0, double t_start, double horizon,
                     Rng& rng) {
  if (!field.domain().contains(r0)) throw DomainError("simulate_nrw: start position outside the domain");
  if (!(t_start < horizon)) throw ConfigError("simulate_nrw: t_start must precede the horizon");
  NrwPath path;
  path.events.push_back({t_start, r0, v0});
  detail::PlainModel model{&field, rates};
  detail::PathSink sink{&path};
  detail::walk(model, field.domain(), r0, v0, t_start, horizon, rng, sink);
  return path;
}

double sample_scatter_time(const CrossSectionField& field, NrwRates rates, Vec2 r, Vec2 v, Rng& rng, double max_time) {
  const Domain& dom = field.domain();
  if (!dom.contains(r)) throw DomainError("sample_scatter_time: position outside the domain");
  const double T = std::min(dom.exit_time(r, v), max_time);
  detail::PlainModel model{&field, rates};
  double hit = std::numeric_limits<double>::infinity();
  dom.for_each_piece(r, v, T, [&](double s0, double s1, RegionId reg) { return model.thin(r, v, s0, s1, reg, rng, hit); });
  return hit < T ? hit : std::numeric_limits<double>::infinity();
}

PhaseState trajectory_at(const NrwPath& path, double s) {
  const bool truncated_end = !path.exited && s == path.t_end;
  if (s < path.t_start() || (s >= path.t_end && !truncated_end))
    throw OutOfLifeError("trajectory_at: time outside the path's life");
  // Last event with t_k <= s.
  auto it = std::upper_bound(path.events.begin(), path.events.end(), s,
                             [](double x, const PathEvent& e) { return x < e.t; });
  const PathEvent& e = *(it - 1);
  return {advance(e.r, e.v, s - e.t), e.v};
}

double beta_integral(const NrwPath& path, const CrossSectionField& field, double t) {
  if (t > path.t_end) throw OutOfLifeError("beta_integral: time past the end of the path");
  double acc = 0.0;
  for_each_path_piece(path, field.domain(), t, [&](double t0, double t1, Vec2, Vec2, RegionId reg) {
    acc += field.material(reg).beta() * (t1 - t0);
  });
  return acc;
}

void write_events_csv_header(std::ostream& os) { os << "cycle,t,rx,ry,vx,vy,event\n"; }

void write_events_csv(std::ostream& os, std::uint64_t cycle, const NrwPath& path) {
  for (std::size_t k = 1; k < path.events.size(); ++k) {
    const auto& e = path.events[k];
    os << fmt::format("{},{},{},{},{},{},scatter\n", cycle, e.t, e.r.x, e.r.y, e.v.x, e.v.y);
  }
  const Vec2 r = path.end_position();
  const Vec2 v = path.end_velocity();
  os << fmt::format("{},{},{},{},{},{},{}\n", cycle, path.t_end, r.x, r.y, v.x, v.y, path.exited ? "exit" : "horizon");
}

}  // namespace ntmc
