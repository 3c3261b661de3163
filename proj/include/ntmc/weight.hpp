// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "ntmc/htransform.hpp"
#include "ntmc/slab1d.hpp"

namespace ntmc {

// Bounded non-negative test function g(r, v).
class WeightFunction {
 public:
  enum class Kind { constant, box, slab_phi, slab_phi_tilde, custom };

  static WeightFunction constant(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("weight must be non-negative and finite", "run.g");
    WeightFunction w;
    w.kind_ = Kind::constant;
    w.scale_ = c;
    return w;
  }

  // scale * 1{x0 < x < x1, y0 < y < y1, v in sector}. In 1D the y limits
  // are ignored. A sector is an angular window [a0, a1) of the velocity
  // (1D: +v has angle 0, -v angle pi); no window means every velocity.
  struct Box {
    double x0 = -std::numeric_limits<double>::infinity();
    double x1 = std::numeric_limits<double>::infinity();
    double y0 = -std::numeric_limits<double>::infinity();
    double y1 = std::numeric_limits<double>::infinity();
    std::optional<std::pair<double, double>> sector;
  };
  static WeightFunction box(Box b, double scale = 1.0) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw ConfigError("weight must be non-negative and finite", "run.g");
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1)) throw ConfigError("empty box", "run.g");
    WeightFunction w;
    w.kind_ = Kind::box;
    w.box_ = b;
    w.scale_ = scale;
    return w;
  }

  static WeightFunction slab_phi(const slab::SlabEigen& e, double scale = 1.0) {
    WeightFunction w;
    w.kind_ = Kind::slab_phi;
    w.eigen_ = e;
    w.scale_ = scale;
    return w;
  }
  static WeightFunction slab_phi_tilde(const slab::SlabEigen& e, double scale = 1.0) {
    WeightFunction w = slab_phi(e, scale);
    w.kind_ = Kind::slab_phi_tilde;
    return w;
  }

  // `interior` declares that f vanishes in a neighbourhood of the boundary.
  static WeightFunction custom(std::function<double(Vec2, Vec2)> f, double bound, bool interior = false,
                               std::string label = "custom") {
    WeightFunction w;
    w.kind_ = Kind::custom;
    w.fn_ = std::make_shared<std::function<double(Vec2, Vec2)>>(std::move(f));
    w.scale_ = bound;
    w.interior_ = interior;
    w.label_ = std::move(label);
    return w;
  }

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  bool is_zero() const { return scale_ == 0.0 && kind_ != Kind::custom; }
  double constant_value() const { return scale_; }
  const Box& box_spec() const { return box_; }

  double operator()(Vec2 r, Vec2 v) const {
    switch (kind_) {
      case Kind::constant: return scale_;
      case Kind::box: return in_box(r, v) ? scale_ : 0.0;
      case Kind::slab_phi: return scale_ * std::max(0.0, eigen_->phi(r.x, v.x));
      case Kind::slab_phi_tilde: return scale_ * std::max(0.0, eigen_->phi_tilde(r.x, v.x));
      case Kind::custom: return (*fn_)(r, v);
    }
    return 0.0;
  }

  // Upper bound of g.
  double bound() const {
    switch (kind_) {
      case Kind::slab_phi:
      case Kind::slab_phi_tilde: {
        // Profiles are monotone in r with the maximum at the inflow end.
        const double L = eigen_->config().L;
        return scale_ * std::max(eigen_->profile(-L), eigen_->profile(L));
      }
      default: return scale_;
    }
  }

  // Support kept a positive distance away from the boundary of dom.
  bool interior_support(const Domain& dom) const {
    if (is_zero()) return true;
    if (kind_ == Kind::custom) return interior_;
    if (kind_ != Kind::box) return false;
    const bool x_in = box_.x0 > -dom.half_x() && box_.x1 < dom.half_x();
    if (dom.dim() == 1) return x_in;
    return x_in && box_.y0 > -dom.half_y() && box_.y1 < dom.half_y();
  }

  // True when g <= C h for some C, i.e. g/h stays bounded where h -> 0.
  bool dominated_by(const HFunction& h, const Domain& dom) const {
    if (!h.vanishes_on_boundary() || interior_support(dom)) return true;
    // phi vanishes exactly where every slab h vanishes (the outflow end),
    // at the same linear rate.
    return kind_ == Kind::slab_phi && h.slab_only() && h.kind() != HFunction::Kind::power;
  }

  std::string name() const {
    switch (kind_) {
      case Kind::constant: return "constant";
      case Kind::box: return "box";
      case Kind::slab_phi: return "slab_phi";
      case Kind::slab_phi_tilde: return "slab_phi_tilde";
      case Kind::custom: return label_;
    }
    return "?";
  }

 private:
  Kind kind_ = Kind::constant;
  double scale_ = 1.0;
  Box box_;
  std::optional<slab::SlabEigen> eigen_;
  std::shared_ptr<std::function<double(Vec2, Vec2)>> fn_;
  bool interior_ = false;
  std::string label_;

  bool in_box(Vec2 r, Vec2 v) const {
    if (!(r.x > box_.x0 && r.x < box_.x1 && r.y > box_.y0 && r.y < box_.y1)) return false;
    if (!box_.sector) return true;
    double a = std::atan2(v.y, v.x);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a >= box_.sector->first && a < box_.sector->second;
  }
};

}  // namespace ntmc
