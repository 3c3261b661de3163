// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ntmc/geometry.hpp"
#include "ntmc/rng.hpp"

namespace ntmc {

// Per-region constants. 1D kernels: scatter flips the sign, fission children
// keep the parent velocity. 2D kernels: uniform outgoing angle for both.
struct Material {
  double sigma_s = 0.0;
  double sigma_f = 0.0;
  double fission_mass = 0.0;  // m_f, mean offspring per fission

  double alpha() const { return sigma_s + sigma_f * fission_mass; }
  double beta() const { return sigma_f * (fission_mass - 1.0); }
};

// Averages over outgoing angle in 2D. The default rule splits the circle at
// caller-supplied kink angles and uses Gauss-Legendre on each arc; the
// trapezoid rule ignores the kinks.
class AngularQuadrature {
 public:
  enum class Rule { split_gauss, trapezoid };

  explicit AngularQuadrature(int nodes = 128, Rule rule = Rule::split_gauss);

  int nodes() const { return n_; }
  Rule rule() const { return rule_; }

  // Normalised nodes (angle, weight) with weights summing to 1. `breaks`
  // are kink angles in any order and range.
  struct Node {
    double angle;
    double weight;
  };
  using Nodes = boost::container::small_vector<Node, 160>;
  Nodes nodes_for(std::span<const double> breaks) const;

  // (1/2pi) * integral of f(angle) over the circle.
  template <class F>
  double average(F&& f, std::span<const double> breaks = {}) const {
    const Nodes ns = nodes_for(breaks);
    double s = 0.0;
    for (const auto& nd : ns) s += nd.weight * f(nd.angle);
    return s;
  }

 private:
  int n_;
  Rule rule_;
};

// Gauss-Legendre rule of the given order on [-1, 1] (cached, thread-safe).
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int order);

class CrossSectionField {
 public:
  CrossSectionField(Domain domain, VelocitySpace velocity, std::vector<Material> materials);

  const Domain& domain() const { return domain_; }
  const VelocitySpace& velocity() const { return velocity_; }
  int dim() const { return domain_.dim(); }
  const Material& material(RegionId id) const { return materials_[static_cast<std::size_t>(id)]; }
  const std::vector<Material>& materials() const { return materials_; }

  // Region at an interior point; DomainError outside.
  RegionId region(Vec2 r) const { return domain_.region_of(r); }

  double alpha(Vec2 r, Vec2 v) const;
  double beta(Vec2 r, Vec2 v) const;
  double beta_max() const { return beta_max_; }
  double beta_min() const { return beta_min_; }
  double alpha_max() const { return alpha_max_; }

  // Normalised combined kernel. 1D: point mass of v -> vp (zero unless
  // vp = +-v). 2D: density in outgoing angle, per radian; on an annulus the
  // density is per unit velocity area.
  double pi_density(Vec2 r, Vec2 v, Vec2 vp) const;

  // Draws from pi (combined), pi_s, and the child law pi_f / m_f.
  Vec2 sample_pi(RegionId reg, Vec2 v, Rng& rng) const;
  Vec2 sample_scatter(Vec2 v, Rng& rng) const;
  Vec2 sample_child(Vec2 v, Rng& rng) const;

  // Kernel actions pi_s[f](r, v) and pi_f[g](r, v); f takes (r, v').
  template <class F>
  double pi_s_action(F&& f, Vec2 r, Vec2 v, const AngularQuadrature& q) const;
  template <class F>
  double pi_f_action(F&& f, Vec2 r, Vec2 v, const AngularQuadrature& q) const;

  // (H1)-(H3) violations; H4 is reported as a note, not a violation.
  std::vector<std::string> validate() const;
  std::vector<std::string> notes() const;

 private:
  Domain domain_;
  VelocitySpace velocity_;
  std::vector<Material> materials_;
  double beta_max_ = 0.0, beta_min_ = 0.0, alpha_max_ = 0.0;

  template <class F>
  double angular_mean(F&& f, Vec2 r, const AngularQuadrature& q) const;
};

template <class F>
double CrossSectionField::angular_mean(F&& f, Vec2 r, const AngularQuadrature& q) const {
  const double s = velocity_.speed();
  return q.average([&](double a) { return f(r, Vec2{s * std::cos(a), s * std::sin(a)}); });
}

template <class F>
double CrossSectionField::pi_s_action(F&& f, Vec2 r, Vec2 v, const AngularQuadrature& q) const {
  if (dim() == 1) return f(r, -v);
  return angular_mean(f, r, q);
}

template <class F>
double CrossSectionField::pi_f_action(F&& f, Vec2 r, Vec2 v, const AngularQuadrature& q) const {
  const double m = material(region(r)).fission_mass;
  if (m == 0.0) return 0.0;
  if (dim() == 1) return m * f(r, v);
  return m * angular_mean(f, r, q);
}

}  // namespace ntmc
