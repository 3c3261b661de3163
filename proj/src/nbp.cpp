// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/nbp.hpp"

#include <deque>
#include <ostream>

#include <fmt/format.h>

namespace ntmc {

std::optional<FissionEvent> sample_fission_event(const NrwPath& path, const CrossSectionField& field, Rng& rng) {
  double e = rng.exponential();
  std::optional<FissionEvent> out;
  bool found = false;
  for_each_path_piece(path, field.domain(), path.t_end, [&](double t0, double t1, Vec2 r0, Vec2 v, RegionId reg) {
    if (found) return;
    const double sf = field.material(reg).sigma_f;
    const double need = sf > 0.0 ? e / sf : std::numeric_limits<double>::infinity();
    if (need < t1 - t0) {
      found = true;
      FissionEvent fe{t0 + need, advance(r0, v, need), v, {}};
      const double mass = field.material(reg).fission_mass;
      const int n = mass > 0.0 ? std::poisson_distribution<int>(mass)(rng) : 0;
      for (int j = 0; j < n; ++j) fe.children.push_back(field.sample_child(v, rng));
      out = std::move(fe);
      return;
    }
    e -= sf * (t1 - t0);
  });
  return out;
}

namespace {

void trim(NrwPath& path, double gamma) {
  while (path.events.size() > 1 && path.events.back().t > gamma) path.events.pop_back();
  path.t_end = gamma;
  path.exited = false;
}

}  // namespace

NbpForest simulate_nbp(const CrossSectionField& field, std::span<const PhaseState> initial, double horizon,
                       std::uint64_t seed, const NbpOptions& opt) {
  if (initial.empty()) throw ConfigError("initial configuration is empty", "run.initial");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive", "run.t");
  struct Item {
    PhaseState s;
    double birth;
    std::int64_t parent;
    int generation;
    std::uint64_t id;
  };
  NbpForest forest;
  forest.horizon = horizon;
  std::deque<Item> queue;
  for (std::size_t i = 0; i < initial.size(); ++i) queue.push_back({initial[i], 0.0, -1, 0, root_lineage(i)});
  std::uint64_t created = initial.size();
  Rng rng;
  while (!queue.empty()) {
    Item it = queue.front();
    queue.pop_front();
    rng.reseed(derive_seed(seed, it.id));
    NbpTrajectory tr;
    tr.birth = it.birth;
    tr.parent = it.parent;
    tr.generation = it.generation;
    if (it.birth >= horizon) {
      // Born exactly at the horizon: a zero-length record.
      tr.path.events.push_back({it.birth, it.s.r, it.s.v});
      tr.path.t_end = horizon;
      forest.trajectories.push_back(std::move(tr));
      continue;
    }
    tr.path = simulate_nrw(field, NrwRates::scatter_only, it.s.r, it.s.v, it.birth, horizon, rng);
    const auto fe = sample_fission_event(tr.path, field, rng);
    const auto self = static_cast<std::int64_t>(forest.trajectories.size());
    if (fe) {
      trim(tr.path, fe->time);
      tr.fissioned = true;
      for (std::size_t j = 0; j < fe->children.size(); ++j)
        queue.push_back({{fe->r, fe->children[j]}, fe->time, self, it.generation + 1, child_lineage(it.id, j)});
      created += fe->children.size();
    }
    forest.trajectories.push_back(std::move(tr));
    if (created > opt.population_cap) {
      forest.valid = false;
      if (opt.throw_on_cap)
        throw ResourceError("population cap of " + std::to_string(opt.population_cap) + " particles exceeded");
      return forest;
    }
  }
  return forest;
}

std::vector<PhaseState> alive_at(const NbpForest& forest, double t) {
  std::vector<PhaseState> out;
  for (const auto& tr : forest.trajectories) {
    if (tr.birth > t) continue;
    const bool horizon_end = !tr.path.exited && !tr.fissioned && tr.path.t_end == t;
    if (t < tr.path.t_end || horizon_end) out.push_back(trajectory_at(tr.path, t));
  }
  return out;
}

void write_forest_csv_header(std::ostream& os) { os << "cycle,particle,parent,birth,t,rx,ry,vx,vy,event\n"; }

void write_forest_csv(std::ostream& os, std::uint64_t cycle, const NbpForest& forest) {
  for (std::size_t i = 0; i < forest.trajectories.size(); ++i) {
    const auto& tr = forest.trajectories[i];
    const auto& p = tr.path;
    for (std::size_t k = 1; k < p.events.size(); ++k) {
      const auto& e = p.events[k];
      os << fmt::format("{},{},{},{},{},{},{},{},{},scatter\n", cycle, i, tr.parent, tr.birth, e.t, e.r.x, e.r.y, e.v.x,
                        e.v.y);
    }
    const Vec2 r = p.end_position();
    const Vec2 v = p.end_velocity();
    const char* ev = tr.fissioned ? "fission" : (p.exited ? "exit" : "horizon");
    os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", cycle, i, tr.parent, tr.birth, p.t_end, r.x, r.y, v.x, v.y, ev);
  }
}

}  // namespace ntmc
