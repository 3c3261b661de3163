// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ntmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Domain Domain::interval(double half_width, std::vector<double> splits) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("half-width must be positive and finite");
  std::sort(splits.begin(), splits.end());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (!(splits[i] > -half_width && splits[i] < half_width)) throw ConfigError("split outside the interval");
    if (i > 0 && splits[i] == splits[i - 1]) throw ConfigError("duplicate split");
  }
  Domain d;
  d.kind_ = Kind::interval;
  d.lx_ = half_width;
  d.ly_ = 0.0;
  d.splits_ = std::move(splits);
  for (std::size_t i = 0; i <= d.splits_.size(); ++i) d.names_.push_back("segment" + std::to_string(i));
  return d;
}

Domain Domain::rectangle(double half_x, double half_y, std::vector<Circle> inclusions) {
  if (!(half_x > 0.0) || !(half_y > 0.0) || !std::isfinite(half_x) || !std::isfinite(half_y))
    throw ConfigError("half-extents must be positive and finite");
  Domain d;
  d.kind_ = Kind::rectangle;
  d.lx_ = half_x;
  d.ly_ = half_y;
  d.names_.push_back("background");
  for (std::size_t i = 0; i < inclusions.size(); ++i) {
    auto& c = inclusions[i];
    if (!(c.radius > 0.0)) throw ConfigError("inclusion radius must be positive");
    if (!(std::abs(c.center.x) + c.radius < half_x && std::abs(c.center.y) + c.radius < half_y))
      throw ConfigError("inclusion must lie strictly inside the rectangle");
    if (c.name.empty()) c.name = "rod" + std::to_string(i + 1);
    d.names_.push_back(c.name);
  }
  d.circles_ = std::move(inclusions);
  return d;
}

bool Domain::contains(Vec2 r) const {
  if (kind_ == Kind::interval) return r.x > -lx_ && r.x < lx_;
  return r.x > -lx_ && r.x < lx_ && r.y > -ly_ && r.y < ly_;
}

bool Domain::in_closure(Vec2 r) const {
  if (kind_ == Kind::interval) return r.x >= -lx_ && r.x <= lx_;
  return r.x >= -lx_ && r.x <= lx_ && r.y >= -ly_ && r.y <= ly_;
}

double Domain::exit_time(Vec2 r, Vec2 v) const {
  if (!in_closure(r)) {
    // Points pushed past the boundary by rounding in r + v t count as on it.
    const double tol = 1e-12 * std::max(lx_, ly_);
    const Vec2 c{std::clamp(r.x, -lx_, lx_), kind_ == Kind::rectangle ? std::clamp(r.y, -ly_, ly_) : r.y};
    if (std::abs(c.x - r.x) > tol || std::abs(c.y - r.y) > tol)
      throw DomainError("exit_time: position outside the domain closure");
    r = c;
  }
  double t = kInf;
  if (v.x > 0.0) t = (lx_ - r.x) / v.x;
  else if (v.x < 0.0) t = (-lx_ - r.x) / v.x;
  if (kind_ == Kind::rectangle) {
    if (v.y > 0.0) t = std::min(t, (ly_ - r.y) / v.y);
    else if (v.y < 0.0) t = std::min(t, (-ly_ - r.y) / v.y);
  }
  if (t == kInf) throw DomainError("exit_time: zero velocity");
  return std::max(t, 0.0);
}

RegionId Domain::region_unchecked(Vec2 r) const {
  if (kind_ == Kind::interval)
    return static_cast<RegionId>(std::upper_bound(splits_.begin(), splits_.end(), r.x) - splits_.begin());
  for (std::size_t i = 0; i < circles_.size(); ++i) {
    const Vec2 d = r - circles_[i].center;
    if (dot(d, d) < circles_[i].radius * circles_[i].radius) return static_cast<RegionId>(i + 1);
  }
  return 0;
}

RegionId Domain::region_of(Vec2 r) const {
  if (!contains(r)) throw DomainError("region_of: position outside the domain");
  return region_unchecked(r);
}

RegionId Domain::find_region(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<RegionId>(i);
  return -1;
}

double Domain::max_chord_from(Vec2 r) const {
  if (kind_ == Kind::interval) return std::max(lx_ - r.x, lx_ + r.x);
  const double dx = std::max(lx_ - r.x, lx_ + r.x);
  const double dy = std::max(ly_ - r.y, ly_ + r.y);
  return std::hypot(dx, dy);
}

Domain::Crossings Domain::crossings(Vec2 r, Vec2 v, double T) const {
  Crossings cs;
  if (kind_ == Kind::interval) {
    if (v.x == 0.0) return cs;
    for (double s : splits_) {
      const double t = (s - r.x) / v.x;
      if (t > 0.0 && t < T) cs.push_back(t);
    }
  } else {
    const double a = dot(v, v);
    for (const auto& c : circles_) {
      const Vec2 d = r - c.center;
      const double b = dot(d, v);
      const double cc = dot(d, d) - c.radius * c.radius;
      const double disc = b * b - a * cc;
      if (disc <= 0.0) continue;
      const double sq = std::sqrt(disc);
      // Stable roots of a s^2 + 2 b s + cc = 0.
      const double q = -(b + std::copysign(sq, b));
      double s1 = q / a, s2 = q != 0.0 ? cc / q : s1;
      if (s1 > s2) std::swap(s1, s2);
      if (s1 > 0.0 && s1 < T) cs.push_back(s1);
      if (s2 > 0.0 && s2 < T) cs.push_back(s2);
    }
  }
  std::sort(cs.begin(), cs.end());
  return cs;
}

VelocitySpace VelocitySpace::two_point(double v0) {
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw ConfigError("speed must be positive and finite");
  VelocitySpace s;
  s.kind_ = Kind::two_point;
  s.vmin_ = s.vmax_ = v0;
  return s;
}

VelocitySpace VelocitySpace::fixed_speed(double v0) {
  VelocitySpace s = two_point(v0);
  s.kind_ = Kind::fixed_speed;
  return s;
}

VelocitySpace VelocitySpace::annulus(double vmin, double vmax) {
  if (!(vmin > 0.0 && vmin < vmax && std::isfinite(vmax))) throw ConfigError("annulus needs 0 < vmin < vmax < inf");
  VelocitySpace s;
  s.kind_ = Kind::annulus;
  s.vmin_ = vmin;
  s.vmax_ = vmax;
  return s;
}

bool VelocitySpace::member(Vec2 v, double tol) const {
  switch (kind_) {
    case Kind::two_point:
      return v.y == 0.0 && std::abs(std::abs(v.x) - vmax_) <= tol * vmax_;
    case Kind::fixed_speed:
      return std::abs(norm(v) - vmax_) <= tol * vmax_;
    case Kind::annulus: {
      const double s = norm(v);
      return s >= vmin_ * (1 - tol) && s <= vmax_ * (1 + tol);
    }
  }
  return false;
}

Vec2 VelocitySpace::with_angle(double angle, Rng& rng) const {
  double speed = vmax_;
  if (kind_ == Kind::annulus) {
    const double u = rng.uniform();
    speed = std::sqrt(vmin_ * vmin_ + u * (vmax_ * vmax_ - vmin_ * vmin_));
  }
  return {speed * std::cos(angle), speed * std::sin(angle)};
}

Vec2 VelocitySpace::sample(Rng& rng) const {
  if (kind_ == Kind::two_point) return {rng.uniform() < 0.5 ? -vmax_ : vmax_, 0.0};
  return with_angle(2.0 * std::numbers::pi * rng.uniform(), rng);
}

}  // namespace ntmc
