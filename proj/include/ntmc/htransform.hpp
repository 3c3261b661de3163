// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "ntmc/nrw.hpp"
#include "ntmc/slab1d.hpp"

namespace ntmc {

// Importance function h(r, v). The Urts family is geometric:
//   directional:  c |v| kappa(r, v)            (= c * distance ahead)
//   urts:         min(c1 |v| kappa(r, v), c2 (|v| kappa(r, -v) + r_shift))
//   lifted:       epsilon + base
//   power:        base^gamma   (the "moderate" transform used by SMC)
// The slab variants are written in the forward coordinate u = sign(v) r.
class HFunction {
 public:
  enum class Kind { constant, directional, urts, lifted, power, slab_h1, slab_h2, slab_h3, slab_eigen };

  static HFunction constant(double c);
  static HFunction directional(double c);
  static HFunction urts(double c1, double c2, double r_shift);
  static HFunction lifted(HFunction base, double epsilon);
  static HFunction power(HFunction base, double gamma);
  static HFunction slab_h1(double L, double v0, double sigma_s);
  static HFunction slab_h2(double L);
  static HFunction slab_h3(double L, double v0, double sigma_s);
  static HFunction slab_eigen(const slab::SlabEigen& e);

  Kind kind() const { return kind_; }
  std::string name() const;

  double operator()(const Domain& dom, Vec2 r, Vec2 v) const;

  // Th/h: right-limit derivative of h along the flight direction, over h.
  double transport_term(const Domain& dom, Vec2 r, Vec2 v) const;

  // sup over v' of h(r, v') or an upper bound for it (exact in 1D).
  double envelope(const Domain& dom, const VelocitySpace& vel, Vec2 r) const;

  // Upper bound of envelope() over the segment [ra, rb].
  double envelope_bound(const Domain& dom, const VelocitySpace& vel, Vec2 ra, Vec2 rb) const;

  // Angles at which h(r, .) has kinks, for the split angular rule.
  boost::container::small_vector<double, 16> angular_breaks(const Domain& dom, Vec2 r) const;

  // Flight times s in (0, len) where h(r + v s, v) or, in 1D, h(r + v s, -v)
  // has a kink. Sorted.
  boost::container::small_vector<double, 4> ray_breaks(const Domain& dom, Vec2 r, Vec2 v, double len) const;

  // h = 0 on the outgoing boundary.
  bool vanishes_on_boundary() const;
  // |v|(kappa - s) / h bounded below along rays: the h-walk cannot exit.
  bool certified_conservative() const;
  bool is_constant() const { return kind_ == Kind::constant; }
  // Valid only in one dimension.
  bool slab_only() const;

 private:
  Kind kind_ = Kind::constant;
  double a_ = 1.0, b_ = 1.0, c_ = 0.0;  // variant parameters
  double L_ = 1.0;
  std::shared_ptr<const HFunction> base_;
  std::optional<slab::SlabEigen> eigen_;

  // Value and forward derivative of the 1D profile H(u) for slab kinds.
  double profile(double u) const;
  double profile_slope(double u) const;
  // h as a function of the two directional distances (geometric kinds).
  double geometric(double fwd, double bwd) const;
  double global_sup_1d(const Domain& dom, const VelocitySpace& vel) const;
};

// Transformed rates at a point.
struct HRates {
  double alpha_h;   // alpha * (int h pi) / h
  double jump_term; // Jh/h = alpha_h - alpha
  double beta_h;    // Jh/h + beta
};

class HTransform {
 public:
  HTransform(const CrossSectionField& field, HFunction h, AngularQuadrature quad = AngularQuadrature());

  const CrossSectionField& field() const { return *field_; }
  const HFunction& h() const { return h_; }
  const AngularQuadrature& quadrature() const { return quad_; }

  double h_at(Vec2 r, Vec2 v) const { return h_(field_->domain(), r, v); }

  // int h(r, v') pi(r, v, v') dv' / h(r, v), times alpha. SingularRateError
  // when h(r, v) = 0.
  double alpha_h(Vec2 r, Vec2 v, RegionId reg) const;
  HRates rates(Vec2 r, Vec2 v) const;
  double jump_term(Vec2 r, Vec2 v) const { return rates(r, v).jump_term; }
  double transport_term(Vec2 r, Vec2 v) const { return h_.transport_term(field_->domain(), r, v); }

  // Draw from pi^h by rejection against pi. `trials` counts proposals.
  Vec2 sample_pi_h(Vec2 r, Vec2 v, RegionId reg, Rng& rng, std::size_t* trials = nullptr) const;

  // Thinning scan used by the walker; see walk.hpp.
  bool thin(Vec2 r, Vec2 v, double s0, double s1, RegionId reg, Rng& rng, double& hit) const;
  Vec2 jump(Vec2 r, Vec2 v, RegionId reg, Rng& rng) const { return sample_pi_h(r, v, reg, rng); }

  // Integral of Jh/h + beta along the path up to t (adaptive quadrature on
  // each segment-region piece).
  double potential_integral(const NrwPath& path, double t) const;

  // log of h(r0) exp(int (Lh/h + beta)) g(R_t)/h(R_t), with the transport
  // part integrated exactly as log-ratios of h. -inf when g(R_t) = 0 or the
  // path died before t.
  double log_weight(const NrwPath& path, double t, double g_end) const;

 private:
  const CrossSectionField* field_;
  HFunction h_;
  AngularQuadrature quad_;
  double sup1d_ = 0.0;
};

NrwPath simulate_hnrw(const HTransform& ht, Vec2 r0, Vec2 v0, double t_start, double horizon, Rng& rng);

struct VarsigmaBounds {
  double lower = 0.0;          // inf of (Th + Jh)/h + beta
  double upper = 0.0;          // sup of the same
  double sup_generator = 0.0;  // sup of (Th + Jh)/h
  bool upper_diverges = false; // grows without bound under boundary refinement
};

// Grid extrema over an n-point (per axis) interior grid, refined towards the
// boundary to detect blow-up.
VarsigmaBounds varsigma_bounds(const HTransform& ht, int grid = 200);

}  // namespace ntmc
