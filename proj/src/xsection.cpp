// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/xsection.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

#include "ntmc/error.hpp"

namespace ntmc {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxGaussOrder = 512;

GaussRule build_rule(int n) {
  GaussRule g;
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      g.x.push_back(0.0);
      g.w.push_back(w);
    } else {
      g.x.push_back(-z);
      g.w.push_back(w);
      g.x.push_back(z);
      g.w.push_back(w);
    }
  }
  // Sort by node for a stable summation order.
  std::vector<std::size_t> idx(g.x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return g.x[a] < g.x[b]; });
  GaussRule s;
  for (auto i : idx) {
    s.x.push_back(g.x[i]);
    s.w.push_back(g.w[i]);
  }
  return s;
}
}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::array<GaussRule, kMaxGaussOrder + 1> rules;
  static std::array<std::once_flag, kMaxGaussOrder + 1> flags;
  order = std::clamp(order, 1, kMaxGaussOrder);
  std::call_once(flags[static_cast<std::size_t>(order)], [&] { rules[static_cast<std::size_t>(order)] = build_rule(order); });
  return rules[static_cast<std::size_t>(order)];
}

AngularQuadrature::AngularQuadrature(int nodes, Rule rule) : n_(nodes), rule_(rule) {
  if (nodes < 4) throw ConfigError("angular quadrature needs at least 4 nodes", "h.n_angle");
}

AngularQuadrature::Nodes AngularQuadrature::nodes_for(std::span<const double> breaks) const {
  Nodes out;
  if (rule_ == Rule::trapezoid || breaks.empty()) {
    const double w = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out.push_back({kTwoPi * i / n_, w});
    return out;
  }
  boost::container::small_vector<double, 16> b;
  for (double a : breaks) {
    double x = std::fmod(a, kTwoPi);
    if (x < 0.0) x += kTwoPi;
    b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return y - x < 1e-14; }), b.end());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < nb; ++i) {
    const double a0 = b[i];
    const double a1 = i + 1 < nb ? b[i + 1] : b[0] + kTwoPi;
    const double len = a1 - a0;
    if (len <= 0.0) continue;
    const int order = std::max(2, static_cast<int>(std::lround(n_ * len / kTwoPi)));
    const GaussRule& g = gauss_legendre(order);
    for (std::size_t j = 0; j < g.x.size(); ++j)
      out.push_back({a0 + 0.5 * len * (g.x[j] + 1.0), 0.5 * len * g.w[j] / kTwoPi});
  }
  return out;
}

CrossSectionField::CrossSectionField(Domain domain, VelocitySpace velocity, std::vector<Material> materials)
    : domain_(std::move(domain)), velocity_(velocity), materials_(std::move(materials)) {
  if (static_cast<int>(materials_.size()) != domain_.num_regions())
    throw ConfigError("one material per region required (" + std::to_string(domain_.num_regions()) + " regions, " +
                          std::to_string(materials_.size()) + " materials)",
                      "materials");
  if (domain_.dim() != velocity_.dim()) throw ConfigError("velocity space dimension does not match the domain", "geometry.velocity");
  for (std::size_t i = 0; i < materials_.size(); ++i) {
    const auto& m = materials_[i];
    const std::string key = "materials." + domain_.region_name(static_cast<RegionId>(i));
    if (!std::isfinite(m.sigma_s) || !std::isfinite(m.sigma_f) || !std::isfinite(m.fission_mass))
      throw ConfigError("non-finite rate", key);
    if (m.sigma_s < 0.0 || m.sigma_f < 0.0 || m.fission_mass < 0.0) throw ConfigError("negative rate or mass", key);
  }
  beta_max_ = -std::numeric_limits<double>::infinity();
  beta_min_ = std::numeric_limits<double>::infinity();
  for (const auto& m : materials_) {
    beta_max_ = std::max(beta_max_, m.beta());
    beta_min_ = std::min(beta_min_, m.beta());
    alpha_max_ = std::max(alpha_max_, m.alpha());
  }
}

double CrossSectionField::alpha(Vec2 r, Vec2) const { return material(region(r)).alpha(); }
double CrossSectionField::beta(Vec2 r, Vec2) const { return material(region(r)).beta(); }

double CrossSectionField::pi_density(Vec2 r, Vec2 v, Vec2 vp) const {
  const Material& m = material(region(r));
  const double a = m.alpha();
  if (a == 0.0) return 0.0;
  if (dim() == 1) {
    double p = 0.0;
    if (vp == -v) p += m.sigma_s / a;
    if (vp == v) p += m.sigma_f * m.fission_mass / a;
    return p;
  }
  if (velocity_.kind() == VelocitySpace::Kind::annulus) {
    if (!velocity_.member(vp)) return 0.0;
    return 1.0 / (std::numbers::pi * (velocity_.vmax() * velocity_.vmax() - velocity_.vmin() * velocity_.vmin()));
  }
  return 1.0 / kTwoPi;
}

Vec2 CrossSectionField::sample_pi(RegionId reg, Vec2 v, Rng& rng) const {
  const Material& m = material(reg);
  if (dim() == 1) {
    const double u = rng.uniform();
    return u * m.alpha() < m.sigma_s ? -v : v;
  }
  return velocity_.sample(rng);
}

Vec2 CrossSectionField::sample_scatter(Vec2 v, Rng& rng) const {
  if (dim() == 1) return -v;
  return velocity_.sample(rng);
}

Vec2 CrossSectionField::sample_child(Vec2 v, Rng& rng) const {
  if (dim() == 1) return v;
  return velocity_.sample(rng);
}

std::vector<std::string> CrossSectionField::validate() const {
  std::vector<std::string> out;
  bool fissile = false;
  for (std::size_t i = 0; i < materials_.size(); ++i) {
    const auto& m = materials_[i];
    const std::string& name = domain_.region_name(static_cast<RegionId>(i));
    // 1D: sigma_s pi_s + sigma_f pi_f > 0 on both v -> -v and v -> v.
    const bool h2 = dim() == 1 ? (m.sigma_s > 0.0 && m.sigma_f * m.fission_mass > 0.0) : m.alpha() > 0.0;
    if (!h2) out.push_back("H2: region '" + name + "' has a vanishing combined kernel");
    if (m.sigma_f * m.fission_mass > 0.0) fissile = true;
  }
  if (!fissile) out.push_back("H3: no region with positive fission yield");
  return out;
}

std::vector<std::string> CrossSectionField::notes() const {
  return {"H4: offspring counts are Poisson and therefore not bounded"};
}

}  // namespace ntmc
