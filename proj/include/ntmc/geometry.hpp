// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "ntmc/error.hpp"
#include "ntmc/rng.hpp"
#include "ntmc/vec2.hpp"

namespace ntmc {

// Material region label. 1D: segment index left to right. 2D: 0 is the
// background, inclusion i is region i + 1.
using RegionId = int;

struct Circle {
  Vec2 center;
  double radius = 0.0;
  std::string name;
};

// Open convex domain: an interval (-L, L) or a rectangle
// (-Lx, Lx) x (-Ly, Ly). Splits and inclusions only relabel materials.
class Domain {
 public:
  enum class Kind { interval, rectangle };

  static Domain interval(double half_width, std::vector<double> splits = {});
  static Domain rectangle(double half_x, double half_y, std::vector<Circle> inclusions = {});

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::interval ? 1 : 2; }
  double half_x() const { return lx_; }
  double half_y() const { return ly_; }
  const std::vector<double>& splits() const { return splits_; }
  const std::vector<Circle>& inclusions() const { return circles_; }

  bool contains(Vec2 r) const;
  bool in_closure(Vec2 r) const;

  // Smallest t > 0 with r + v t on the boundary. Throws DomainError for r
  // outside the closure or v = 0.
  double exit_time(Vec2 r, Vec2 v) const;

  RegionId region_of(Vec2 r) const;
  int num_regions() const { return static_cast<int>(names_.size()); }
  const std::string& region_name(RegionId id) const { return names_.at(static_cast<std::size_t>(id)); }
  // -1 when no region has that name.
  RegionId find_region(std::string_view name) const;

  // Largest boundary distance from r over all directions.
  double max_chord_from(Vec2 r) const;

  // Calls f(s0, s1, region) for consecutive pieces of the ray r + v s,
  // s in [0, T], on which the region is constant. f returns false to stop.
  // Returns false if stopped early.
  template <class F>
  bool for_each_piece(Vec2 r, Vec2 v, double T, F&& f) const;

  // Sorted crossing parameters of region interfaces in (0, T).
  using Crossings = boost::container::small_vector<double, 16>;
  Crossings crossings(Vec2 r, Vec2 v, double T) const;

 private:
  Kind kind_ = Kind::interval;
  double lx_ = 1.0, ly_ = 0.0;
  std::vector<double> splits_;
  std::vector<Circle> circles_;
  std::vector<std::string> names_;
  RegionId region_unchecked(Vec2 r) const;
};

template <class F>
bool Domain::for_each_piece(Vec2 r, Vec2 v, double T, F&& f) const {
  if (!(T > 0.0)) return true;
  if (names_.size() == 1) return f(0.0, T, RegionId{0});
  const Crossings cs = crossings(r, v, T);
  double s0 = 0.0;
  for (std::size_t i = 0; i <= cs.size(); ++i) {
    const double s1 = i < cs.size() ? cs[i] : T;
    if (s1 > s0) {
      const RegionId reg = region_unchecked(advance(r, v, 0.5 * (s0 + s1)));
      if (!f(s0, s1, reg)) return false;
    }
    s0 = s1;
  }
  return true;
}

// Velocity space: {-v0, +v0} in 1D, a circle of radius v0 or an annulus in 2D.
class VelocitySpace {
 public:
  enum class Kind { two_point, fixed_speed, annulus };

  static VelocitySpace two_point(double v0);
  static VelocitySpace fixed_speed(double v0);
  static VelocitySpace annulus(double vmin, double vmax);

  Kind kind() const { return kind_; }
  int dim() const { return kind_ == Kind::two_point ? 1 : 2; }
  double speed() const { return vmax_; }
  double vmin() const { return vmin_; }
  double vmax() const { return vmax_; }

  bool member(Vec2 v, double tol = 1e-12) const;
  // Uniform draw (uniform angle, and area-uniform speed on an annulus).
  Vec2 sample(Rng& rng) const;
  // Uniform direction with a speed drawn as in sample().
  Vec2 with_angle(double angle, Rng& rng) const;

 private:
  Kind kind_ = Kind::two_point;
  double vmin_ = 1.0, vmax_ = 1.0;
};

}  // namespace ntmc
