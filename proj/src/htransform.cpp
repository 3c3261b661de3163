// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/htransform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "ntmc/walk.hpp"

namespace ntmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " must be positive and finite", "h");
}
}  // namespace

HFunction HFunction::constant(double c) {
  require_positive(c, "constant h");
  HFunction h;
  h.kind_ = Kind::constant;
  h.a_ = c;
  return h;
}

HFunction HFunction::directional(double c) {
  require_positive(c, "h.c");
  HFunction h;
  h.kind_ = Kind::directional;
  h.a_ = c;
  return h;
}

HFunction HFunction::urts(double c1, double c2, double r_shift) {
  require_positive(c1, "h.c1");
  require_positive(c2, "h.c2");
  if (!(r_shift >= 0.0) || !std::isfinite(r_shift)) throw ConfigError("must be non-negative and finite", "h.r_shift");
  HFunction h;
  h.kind_ = Kind::urts;
  h.a_ = c1;
  h.b_ = c2;
  h.c_ = r_shift;
  return h;
}

HFunction HFunction::lifted(HFunction base, double epsilon) {
  require_positive(epsilon, "h.epsilon");
  HFunction h;
  h.kind_ = Kind::lifted;
  h.a_ = epsilon;
  h.base_ = std::make_shared<const HFunction>(std::move(base));
  return h;
}

HFunction HFunction::power(HFunction base, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("must lie in [0, 1]", "smc.blend");
  if (gamma == 0.0) return constant(1.0);
  HFunction h;
  h.kind_ = Kind::power;
  h.a_ = gamma;
  h.base_ = std::make_shared<const HFunction>(std::move(base));
  return h;
}

HFunction HFunction::slab_h1(double L, double v0, double sigma_s) {
  require_positive(L, "L");
  require_positive(v0, "v0");
  require_positive(sigma_s, "sigma_s");
  HFunction h;
  h.kind_ = Kind::slab_h1;
  h.L_ = L;
  h.c_ = v0 / sigma_s;
  return h;
}

HFunction HFunction::slab_h2(double L) {
  require_positive(L, "L");
  HFunction h;
  h.kind_ = Kind::slab_h2;
  h.L_ = L;
  return h;
}

HFunction HFunction::slab_h3(double L, double v0, double sigma_s) {
  HFunction h = slab_h1(L, v0, sigma_s);
  h.kind_ = Kind::slab_h3;
  return h;
}

HFunction HFunction::slab_eigen(const slab::SlabEigen& e) {
  HFunction h;
  h.kind_ = Kind::slab_eigen;
  h.L_ = e.config().L;
  h.eigen_ = e;
  return h;
}

std::string HFunction::name() const {
  switch (kind_) {
    case Kind::constant: return "constant";
    case Kind::directional: return "directional";
    case Kind::urts: return "urts";
    case Kind::lifted: return "lifted(" + base_->name() + ")";
    case Kind::power: return "power(" + base_->name() + ")";
    case Kind::slab_h1: return "slab_h1";
    case Kind::slab_h2: return "slab_h2";
    case Kind::slab_h3: return "slab_h3";
    case Kind::slab_eigen: return "slab_phi";
  }
  return "?";
}

bool HFunction::slab_only() const {
  switch (kind_) {
    case Kind::slab_h1:
    case Kind::slab_h2:
    case Kind::slab_h3:
    case Kind::slab_eigen: return true;
    case Kind::lifted:
    case Kind::power: return base_->slab_only();
    default: return false;
  }
}

double HFunction::profile(double u) const {
  switch (kind_) {
    case Kind::slab_h1: return std::min(u + L_ + c_, L_ - u);
    case Kind::slab_h2: return L_ - u;
    case Kind::slab_h3: return (u + L_ + c_) * (L_ - u);
    case Kind::slab_eigen: return std::max(0.0, eigen_->profile(u));
    default: return 0.0;
  }
}

double HFunction::profile_slope(double u) const {
  switch (kind_) {
    case Kind::slab_h1: return (L_ - u) <= (u + L_ + c_) ? -1.0 : 1.0;
    case Kind::slab_h2: return -1.0;
    case Kind::slab_h3: return (L_ - u) - (u + L_ + c_);
    case Kind::slab_eigen: {
      const double x = eigen_->x_star();
      const double z = 0.5 * x * (1.0 - u / L_);
      switch (eigen_->regime()) {
        case slab::Regime::theta_eq_1: return -1.0 / L_;
        case slab::Regime::theta_gt_1: return -0.5 * x / L_ * std::cosh(z) / std::sinh(0.5 * x);
        case slab::Regime::theta_lt_1: return -0.5 * x / L_ * std::cos(z) / std::sin(0.5 * x);
      }
      return 0.0;
    }
    default: return 0.0;
  }
}

double HFunction::geometric(double fwd, double bwd) const {
  switch (kind_) {
    case Kind::constant: return a_;
    case Kind::directional: return a_ * fwd;
    case Kind::urts: return std::min(a_ * fwd, b_ * (bwd + c_));
    case Kind::lifted: return a_ + base_->geometric(fwd, bwd);
    case Kind::power: return std::pow(base_->geometric(fwd, bwd), a_);
    default: return 0.0;
  }
}

double HFunction::operator()(const Domain& dom, Vec2 r, Vec2 v) const {
  if (kind_ == Kind::constant) return a_;
  if (slab_only()) {
    if (kind_ == Kind::lifted) return a_ + (*base_)(dom, r, v);
    if (kind_ == Kind::power) return std::pow((*base_)(dom, r, v), a_);
    return profile(v.x > 0.0 ? r.x : -r.x);
  }
  const double speed = norm(v);
  const double fwd = speed * dom.exit_time(r, v);
  const double bwd = kind_ == Kind::directional ? 0.0 : speed * dom.exit_time(r, -v);
  return geometric(fwd, bwd);
}

double HFunction::transport_term(const Domain& dom, Vec2 r, Vec2 v) const {
  // d/ds h(r + v s, v) at s = 0+, divided by h.
  const double hv = (*this)(dom, r, v);
  switch (kind_) {
    case Kind::constant: return 0.0;
    case Kind::directional: return -a_ * norm(v) / hv;
    case Kind::urts: {
      const double speed = norm(v);
      const double fwd = speed * dom.exit_time(r, v);
      const double bwd = speed * dom.exit_time(r, -v);
      const double slope = a_ * fwd <= b_ * (bwd + c_) ? -a_ * speed : b_ * speed;
      return slope / hv;
    }
    case Kind::lifted: {
      const double hb = (*base_)(dom, r, v);
      return base_->transport_term(dom, r, v) * hb / hv;
    }
    case Kind::power: return a_ * base_->transport_term(dom, r, v);
    default: return std::abs(v.x) * profile_slope(v.x > 0.0 ? r.x : -r.x) / hv;
  }
}

double HFunction::envelope(const Domain& dom, const VelocitySpace& vel, Vec2 r) const {
  if (kind_ == Kind::constant) return a_;
  if (dom.dim() == 1) {
    const double v0 = vel.speed();
    return std::max((*this)(dom, r, Vec2{v0, 0.0}), (*this)(dom, r, Vec2{-v0, 0.0}));
  }
  const double m = dom.max_chord_from(r);
  return geometric(m, m);
}

double HFunction::global_sup_1d(const Domain& dom, const VelocitySpace& vel) const {
  if (kind_ == Kind::constant) return a_;
  // Every 1D variant is concave or monotone in r on each branch, so golden
  // section finds the maximum; a relative margin covers the tolerance.
  const double L = dom.half_x();
  double best = 0.0;
  for (double sgn : {1.0, -1.0}) {
    const Vec2 v{sgn * vel.speed(), 0.0};
    auto f = [&](double x) { return (*this)(dom, Vec2{x, 0.0}, v); };
    double lo = -L, hi = L;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 200 && hi - lo > 1e-14 * L; ++i) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = f(x1);
      }
    }
    best = std::max({best, f(-L), f(L), f1, f2});
  }
  return best * (1.0 + 1e-9);
}

double HFunction::envelope_bound(const Domain& dom, const VelocitySpace& vel, Vec2 ra, Vec2 rb) const {
  if (kind_ == Kind::constant) return a_;
  if (dom.dim() == 1) return global_sup_1d(dom, vel);
  // The max chord is convex in r, and every geometric h is increasing in it.
  const double m = std::max(dom.max_chord_from(ra), dom.max_chord_from(rb));
  return geometric(m, m);
}

boost::container::small_vector<double, 4> HFunction::ray_breaks(const Domain& dom, Vec2 r, Vec2 v,
                                                                double len) const {
  boost::container::small_vector<double, 4> out;
  auto keep = [&](double s) {
    if (s > 0.0 && s < len) out.push_back(s);
  };
  switch (kind_) {
    case Kind::lifted:
    case Kind::power: return base_->ray_breaks(dom, r, v, len);
    case Kind::urts: {
      // a (F - |v| s) = b (B + |v| s + c), with F, B the distances at s = 0.
      const double speed = norm(v);
      const double F = speed * dom.exit_time(r, v), B = speed * dom.exit_time(r, -v);
      keep((a_ * F - b_ * (B + c_)) / (speed * (a_ + b_)));
      break;
    }
    case Kind::slab_h1: {
      // The profile switches branch at u = -c/2, for both directions.
      const double speed = std::abs(v.x), sgn = v.x > 0.0 ? 1.0 : -1.0;
      keep((-0.5 * c_ - sgn * r.x) / speed);
      keep((0.5 * c_ - sgn * r.x) / speed);
      break;
    }
    default: break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

boost::container::small_vector<double, 16> HFunction::angular_breaks(const Domain& dom, Vec2 r) const {
  boost::container::small_vector<double, 16> out;
  if (kind_ == Kind::constant || dom.dim() == 1) return out;
  const double lx = dom.half_x(), ly = dom.half_y();
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      const double a = std::atan2(sy * ly - r.y, sx * lx - r.x);
      out.push_back(a);
      if (kind_ != Kind::directional) out.push_back(a + std::numbers::pi);
    }
  // urts also kinks where its min() switches branch. Between corner
  // directions both distances hit fixed walls, so g has at most two roots
  // per arc; a scan brackets them.
  const HFunction* core = this;
  while (core->kind_ == Kind::lifted || core->kind_ == Kind::power) core = core->base_.get();
  if (core->kind_ != Kind::urts) return out;
  auto dist = [&](double a) { return dom.exit_time(r, Vec2{std::cos(a), std::sin(a)}); };
  auto g = [&](double a) { return core->a_ * dist(a) - core->b_ * (dist(a + std::numbers::pi) + core->c_); };
  std::vector<double> arcs;
  for (double a : out) {
    double x = std::fmod(a, 2.0 * std::numbers::pi);
    arcs.push_back(x < 0.0 ? x + 2.0 * std::numbers::pi : x);
  }
  std::sort(arcs.begin(), arcs.end());
  constexpr int kScan = 6;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const double a0 = arcs[i];
    const double a1 = i + 1 < arcs.size() ? arcs[i + 1] : arcs[0] + 2.0 * std::numbers::pi;
    if (!(a1 - a0 > 1e-12)) continue;
    // Stay off the corner directions themselves.
    double lo = a0 + 1e-12, glo = g(lo);
    for (int j = 1; j <= kScan; ++j) {
      const double hi = j == kScan ? a1 - 1e-12 : a0 + (a1 - a0) * j / kScan;
      const double ghi = g(hi);
      if ((glo < 0.0) != (ghi < 0.0)) {
        std::uintmax_t it = 60;
        const auto root = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                                            boost::math::tools::eps_tolerance<double>(50), it);
        out.push_back(0.5 * (root.first + root.second));
      }
      lo = hi;
      glo = ghi;
    }
  }
  return out;
}

bool HFunction::vanishes_on_boundary() const {
  switch (kind_) {
    case Kind::constant:
    case Kind::lifted: return false;
    case Kind::power: return base_->vanishes_on_boundary();
    default: return true;
  }
}

bool HFunction::certified_conservative() const {
  switch (kind_) {
    case Kind::directional:
    case Kind::urts:
    case Kind::slab_h1:
    case Kind::slab_h2:
    case Kind::slab_h3:
    case Kind::slab_eigen: return true;
    case Kind::power: return a_ == 1.0 && base_->certified_conservative();
    default: return false;
  }
}

HTransform::HTransform(const CrossSectionField& field, HFunction h, AngularQuadrature quad)
    : field_(&field), h_(std::move(h)), quad_(quad) {
  if (h_.slab_only() && field.dim() != 1) throw ConfigError("slab h variants need a 1D domain", "h.variant");
  if (field.dim() == 1) sup1d_ = h_.envelope_bound(field.domain(), field.velocity(), Vec2{}, Vec2{});
}

double HTransform::alpha_h(Vec2 r, Vec2 v, RegionId reg) const {
  const Domain& dom = field_->domain();
  const double hv = h_(dom, r, v);
  if (!(hv > 0.0)) throw SingularRateError("h vanishes at an interior evaluation point");
  const Material& m = field_->material(reg);
  if (field_->dim() == 1)
    return m.sigma_s * (h_(dom, r, -v) / hv) + m.sigma_f * m.fission_mass * (hv / hv);
  const auto breaks = h_.angular_breaks(dom, r);
  const auto nodes = quad_.nodes_for(std::span<const double>(breaks.data(), breaks.size()));
  const double speed = field_->velocity().speed();
  double num = 0.0, den = 0.0;
  for (const auto& nd : nodes) {
    const Vec2 vp{speed * std::cos(nd.angle), speed * std::sin(nd.angle)};
    num += nd.weight * (h_(dom, r, vp) / hv);
    den += nd.weight;
  }
  return m.alpha() * (num / den);
}

HRates HTransform::rates(Vec2 r, Vec2 v) const {
  const RegionId reg = field_->region(r);
  const Material& m = field_->material(reg);
  HRates out{};
  out.alpha_h = alpha_h(r, v, reg);
  out.jump_term = out.alpha_h - m.alpha();
  out.beta_h = out.jump_term + m.beta();
  return out;
}

Vec2 HTransform::sample_pi_h(Vec2 r, Vec2 v, RegionId reg, Rng& rng, std::size_t* trials) const {
  const Domain& dom = field_->domain();
  const double env = h_.envelope(dom, field_->velocity(), r);
  while (true) {
    const Vec2 vp = field_->sample_pi(reg, v, rng);
    if (trials) ++*trials;
    const double hp = h_(dom, r, vp);
    if (hp >= env) return vp;
    if (rng.uniform() * env < hp) return vp;
  }
}

bool HTransform::thin(Vec2 r, Vec2 v, double s0, double s1, RegionId reg, Rng& rng, double& hit) const {
  const Domain& dom = field_->domain();
  const double alpha = field_->material(reg).alpha();
  if (!(alpha > 0.0)) return true;
  double a = s0;
  Vec2 ra = advance(r, v, a);
  double ha = h_(dom, ra, v);
  while (a < s1) {
    double b = s1;
    Vec2 rb = advance(r, v, b);
    double hb = h_(dom, rb, v);
    // alpha_h grows like 1/h towards a zero of h: shrink the piece until h
    // at its far end is at least half of h at its near end.
    while (hb < 0.5 * ha && b - a > 1e-15 * std::max(1.0, std::abs(b))) {
      b = a + 0.5 * (b - a);
      rb = advance(r, v, b);
      hb = h_(dom, rb, v);
    }
    const double hmin = std::min(ha, hb);
    if (!(hmin > 0.0)) return true;
    const double env = field_->dim() == 1 ? sup1d_ : h_.envelope_bound(dom, field_->velocity(), ra, rb);
    const double bound = alpha * (env / hmin);
    double s = a;
    while (true) {
      s += rng.exponential() / bound;
      if (s >= b) break;
      const double u = rng.uniform();
      if (u * bound < alpha_h(advance(r, v, s), v, reg)) {
        hit = s;
        return false;
      }
    }
    a = b;
    ra = rb;
    ha = hb;
  }
  return true;
}

namespace {
// integrate() is not const in this Boost release, so one rule per thread.
boost::math::quadrature::tanh_sinh<double>& tanh_sinh() {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule;
}
}  // namespace

double HTransform::potential_integral(const NrwPath& path, double t) const {
  if (h_.is_constant()) return beta_integral(path, *field_, t);
  using boost::math::quadrature::gauss_kronrod;
  double acc = 0.0;
  for_each_path_piece(path, field_->domain(), t, [&](double t0, double t1, Vec2 r0, Vec2 v, RegionId reg) {
    const Material& m = field_->material(reg);
    const double shift = m.beta() - m.alpha();
    auto f = [&](double s) { return alpha_h(advance(r0, v, s), v, reg) + shift; };
    const double len = t1 - t0;
    // In 2D alpha_h carries the angular rule's error (up to ~1e-5 relative
    // with 128 nodes), so a tighter target only burns evaluations.
    const double tol = field_->dim() == 1 ? 1e-12 : 1e-6;
    // alpha_h grows like 1/(kappa - s) towards the outgoing boundary; cutting
    // at kappa - 2^-j (kappa - a) keeps that ratio below 2 on every piece.
    const double kappa = field_->domain().exit_time(r0, v);
    auto integrate = [&](double a, double b) {
      double err = 0.0;
      double part = gauss_kronrod<double, 15>::integrate(f, a, b, 6, tol, &err);
      if (err > 100.0 * tol * std::max(1.0, std::abs(part))) part = tanh_sinh().integrate(f, a, b, 0.1 * tol);
      acc += part;
    };
    const auto breaks = h_.ray_breaks(field_->domain(), r0, v, len);
    double a = 0.0;
    for (std::size_t i = 0; i <= breaks.size(); ++i) {
      const double b = i < breaks.size() ? breaks[i] : len;
      while (kappa - b < 0.5 * (kappa - a)) {
        const double mid = kappa - 0.5 * (kappa - a);
        integrate(a, mid);
        a = mid;
      }
      integrate(a, b);
      a = b;
    }
  });
  return acc;
}

double HTransform::log_weight(const NrwPath& path, double t, double g_end) const {
  const bool alive = t < path.t_end || (t == path.t_end && !path.exited);
  if (!alive || !(g_end > 0.0)) return -kInf;
  if (h_.is_constant()) return beta_integral(path, *field_, t) + std::log(g_end);
  const Domain& dom = field_->domain();
  const PathEvent& first = path.events.front();
  double lw = std::log(h_at(first.r, first.v));
  for (std::size_t k = 0; k < path.events.size(); ++k) {
    const PathEvent& e = path.events[k];
    if (e.t >= t && k > 0) break;
    const double t1 = std::min(k + 1 < path.events.size() ? path.events[k + 1].t : path.t_end, t);
    lw += std::log(h_(dom, advance(e.r, e.v, t1 - e.t), e.v)) - std::log(h_(dom, e.r, e.v));
  }
  lw += potential_integral(path, t);
  const PhaseState end = trajectory_at(path, t);
  return lw + std::log(g_end) - std::log(h_at(end.r, end.v));
}

NrwPath simulate_hnrw(const HTransform& ht, Vec2 r0, Vec2 v0, double t_start, double horizon, Rng& rng) {
  const auto& field = ht.field();
  if (!field.domain().contains(r0)) throw DomainError("simulate_hnrw: start position outside the domain");
  if (!(t_start < horizon)) throw ConfigError("simulate_hnrw: t_start must precede the horizon");
  NrwPath path;
  path.events.push_back({t_start, r0, v0});
  detail::PathSink sink{&path};
  detail::walk(ht, field.domain(), r0, v0, t_start, horizon, rng, sink);
  return path;
}

VarsigmaBounds varsigma_bounds(const HTransform& ht, int grid) {
  const auto& field = ht.field();
  const Domain& dom = field.domain();
  VarsigmaBounds out;
  out.lower = kInf;
  out.upper = -kInf;
  out.sup_generator = -kInf;
  auto visit = [&](Vec2 r, Vec2 v) {
    const double hv = ht.h_at(r, v);
    if (!(hv > 0.0)) return -kInf;
    const RegionId reg = dom.region_of(r);
    const double gen = ht.transport_term(r, v) + (ht.alpha_h(r, v, reg) - field.material(reg).alpha());
    const double q = gen + field.material(reg).beta();
    out.lower = std::min(out.lower, q);
    out.upper = std::max(out.upper, q);
    out.sup_generator = std::max(out.sup_generator, gen);
    return gen;
  };
  std::vector<Vec2> dirs;
  if (dom.dim() == 1) {
    dirs = {Vec2{field.velocity().speed(), 0.0}, Vec2{-field.velocity().speed(), 0.0}};
  } else {
    for (int i = 0; i < 16; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.5) / 16;
      dirs.push_back(Vec2{field.velocity().speed() * std::cos(a), field.velocity().speed() * std::sin(a)});
    }
  }
  const double lx = dom.half_x(), ly = dom.half_y();
  for (int i = 0; i < grid; ++i) {
    const double x = -lx + 2.0 * lx * (i + 0.5) / grid;
    if (dom.dim() == 1) {
      for (const Vec2& v : dirs) visit(Vec2{x, 0.0}, v);
    } else {
      for (int j = 0; j < grid; ++j) {
        const double y = -ly + 2.0 * ly * (j + 0.5) / grid;
        for (const Vec2& v : dirs) visit(Vec2{x, y}, v);
      }
    }
  }
  // Boundary refinement: sup of the generator at distance d -> 0 from each
  // side. Divergence shows as sustained growth by a factor of ~10 per decade.
  std::vector<Vec2> anchors, normals;
  anchors = {Vec2{lx, 0.0}, Vec2{-lx, 0.0}};
  normals = {Vec2{-1.0, 0.0}, Vec2{1.0, 0.0}};
  if (dom.dim() == 2) {
    anchors.insert(anchors.end(), {Vec2{0.0, ly}, Vec2{0.0, -ly}});
    normals.insert(normals.end(), {Vec2{0.0, -1.0}, Vec2{0.0, 1.0}});
  }
  std::vector<double> sups;
  for (int k = 2; k <= 10; ++k) {
    const double d = std::pow(10.0, -k) * std::min(lx, dom.dim() == 2 ? ly : lx);
    double s = -kInf;
    for (std::size_t a = 0; a < anchors.size(); ++a)
      for (const Vec2& v : dirs) s = std::max(s, visit(anchors[a] + normals[a] * d, v));
    sups.push_back(s);
  }
  const double first = sups.front(), last = sups.back();
  out.upper_diverges = last > 0.0 && last > 1e6 * std::max(1.0, std::abs(first));
  if (out.upper_diverges) out.upper = kInf;
  return out;
}

}  // namespace ntmc
