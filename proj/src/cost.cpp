// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/cost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace ntmc {

namespace {

double kernel_mean(const CrossSectionField& field, const WeightFunction& w, Vec2 r, Vec2 v, bool scatter,
                   const AngularQuadrature& quad) {
  if (w.is_constant()) return w.constant_value();
  auto fn = [&](Vec2 x, Vec2 u) { return w(x, u); };
  if (scatter) return field.pi_s_action(fn, r, v, quad);
  const double m = field.material(field.region(r)).fission_mass;
  return m > 0.0 ? field.pi_f_action(fn, r, v, quad) / m : 0.0;
}

// Integral of rate(r0 + v s) over a straight piece of length len.
template <class Rate>
double piece_integral(Rate&& rate, double len, bool constant) {
  if (constant) return rate(0.0) * len;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(rate, 0.0, len, 10, 1e-10);
}

}  // namespace

double nbp_cost_rate(const CrossSectionField& field, const WeightFunction& f, const WeightFunction& g, Vec2 r, Vec2 v,
                     const AngularQuadrature& quad) {
  const Material& m = field.material(field.region(r));
  double out = 0.0;
  if (m.sigma_s > 0.0) out += m.sigma_s * kernel_mean(field, f, r, v, true, quad);
  if (m.sigma_f > 0.0 && m.fission_mass > 0.0)
    out += m.sigma_f * m.fission_mass * kernel_mean(field, g, r, v, false, quad);
  return out;
}

double nrw_cost_rate(const CrossSectionField& field, const WeightFunction& f, Vec2 r, Vec2 v,
                     const AngularQuadrature& quad) {
  return nbp_cost_rate(field, f, f, r, v, quad);
}

CostCounters track_cost_nbp(const NbpForest& forest, const WeightFunction& f, const WeightFunction& g, double t) {
  if (t > forest.horizon) throw OutOfLifeError("track_cost_nbp: t past the forest horizon");
  CostCounters c;
  for (const auto& tr : forest.trajectories) {
    if (tr.birth > t) continue;
    const auto& first = tr.path.events.front();
    ++c.particles_created;
    c.weighted_cost += g(first.r, first.v);
    for (std::size_t k = 1; k < tr.path.events.size(); ++k) {
      const auto& e = tr.path.events[k];
      if (e.t > t) break;
      ++c.scatter_events;
      c.weighted_cost += f(e.r, e.v);
    }
  }
  return c;
}

double compensator_nbp(const NbpForest& forest, const CrossSectionField& field, const WeightFunction& f,
                       const WeightFunction& g, double t, const AngularQuadrature& quad) {
  if (t > forest.horizon) throw OutOfLifeError("compensator_nbp: t past the forest horizon");
  const bool constant = f.is_constant() && g.is_constant();
  double acc = 0.0;
  for (const auto& tr : forest.trajectories) {
    if (tr.birth >= t) continue;
    const double upto = std::min(t, tr.path.t_end);
    for_each_path_piece(tr.path, field.domain(), upto, [&](double t0, double t1, Vec2 r0, Vec2 v, RegionId) {
      auto rate = [&](double s) { return nbp_cost_rate(field, f, g, advance(r0, v, s), v, quad); };
      acc += piece_integral(rate, t1 - t0, constant);
    });
  }
  return acc;
}

double track_cost_nrw(const NrwPath& path, const WeightFunction& f, double t) {
  double c = 0.0;
  for (std::size_t k = 1; k < path.events.size(); ++k) {
    const auto& e = path.events[k];
    if (e.t > t) break;
    c += f(e.r, e.v);
  }
  return c;
}

double compensator_nrw(const NrwPath& path, const CrossSectionField& field, const WeightFunction& f, double t,
                       const AngularQuadrature& quad) {
  const double upto = std::min(t, path.t_end);
  double acc = 0.0;
  for_each_path_piece(path, field.domain(), upto, [&](double t0, double t1, Vec2 r0, Vec2 v, RegionId) {
    auto rate = [&](double s) { return nrw_cost_rate(field, f, advance(r0, v, s), v, quad); };
    acc += piece_integral(rate, t1 - t0, f.is_constant());
  });
  return acc;
}

CostGridVisitor::CostGridVisitor(const CrossSectionField& field, double f, double g, std::vector<double> times)
    : field_(&field), f_(f), g_(g), times_(std::move(times)), out_(times_.size()) {
  if (!std::is_sorted(times_.begin(), times_.end())) throw ConfigError("cost grid must be sorted", "run.times");
}

void CostGridVisitor::birth(std::uint64_t, double t, Vec2, Vec2) {
  for (std::size_t i = times_.size(); i-- > 0 && times_[i] >= t;) {
    ++out_[i].particles_created;
    out_[i].weighted_cost += g_;
  }
}

void CostGridVisitor::scatter(double t, Vec2, Vec2) {
  for (std::size_t i = times_.size(); i-- > 0 && times_[i] >= t;) {
    ++out_[i].scatter_events;
    out_[i].weighted_cost += f_;
  }
}

void CostGridVisitor::segment(double t0, Vec2 r0, Vec2 v, double t1, SegmentEnd) {
  if (t1 <= t0) return;
  const Domain& dom = field_->domain();
  dom.for_each_piece(r0, v, t1 - t0, [&](double s0, double s1, RegionId reg) {
    const Material& m = field_->material(reg);
    const double rate = m.sigma_s * f_ + m.sigma_f * m.fission_mass * g_;
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const double hi = std::min(t0 + s1, times_[i]);
      if (hi > t0 + s0) out_[i].compensator += rate * (hi - (t0 + s0));
    }
    return true;
  });
}

void write_cost_csv_header(std::ostream& os) { os << "t,cost_cpu,cost_mem,compensator\n"; }

void write_cost_csv(std::ostream& os, double t, double cpu, double mem, double compensator) {
  os << fmt::format("{},{},{},{}\n", t, cpu, mem, compensator);
}

BudgetRegime parse_budget_regime(const std::string& s) {
  if (s == "critical") return BudgetRegime::critical;
  if (s == "supercritical") return BudgetRegime::supercritical;
  if (s == "subcritical") return BudgetRegime::subcritical;
  if (s == "nrw") return BudgetRegime::nrw;
  if (s == "h_nrw" || s == "hnrw") return BudgetRegime::h_nrw;
  throw ConfigError("unknown regime '" + s + "'", "budget.regime");
}

std::string to_string(BudgetRegime r) {
  switch (r) {
    case BudgetRegime::critical: return "critical";
    case BudgetRegime::supercritical: return "supercritical";
    case BudgetRegime::subcritical: return "subcritical";
    case BudgetRegime::nrw: return "nrw";
    case BudgetRegime::h_nrw: return "h_nrw";
  }
  return "?";
}

namespace {

// Exponent a of the kappa term e^{a t}/k; 0 for the supercritical case.
double growth_exponent(const BudgetInput& in) {
  switch (in.regime) {
    case BudgetRegime::critical:
    case BudgetRegime::supercritical: return 0.0;
    case BudgetRegime::subcritical: return -in.lambda_star;
    case BudgetRegime::nrw:
    case BudgetRegime::h_nrw: return in.lambda_rate - 2.0 * in.lambda_star;
  }
  return 0.0;
}

void check(const BudgetInput& in) {
  auto pos = [](double x, const char* key) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("must be positive and finite", key);
  };
  pos(in.epsilon, "budget.epsilon");
  pos(in.kappa0, "budget.kappa0");
  pos(in.kappa, "budget.kappa");
  pos(in.kappa4, "budget.kappa4");
  if (!std::isfinite(in.lambda_star)) throw ConfigError("must be finite", "budget.lambda_star");
  switch (in.regime) {
    case BudgetRegime::critical:
      if (in.lambda_star != 0.0) throw ConfigError("critical regime needs lambda_star = 0", "budget.lambda_star");
      break;
    case BudgetRegime::supercritical:
      if (!(in.lambda_star > 0.0)) throw ConfigError("supercritical regime needs lambda_star > 0", "budget.lambda_star");
      break;
    case BudgetRegime::subcritical:
      if (!(in.lambda_star < 0.0)) throw ConfigError("subcritical regime needs lambda_star < 0", "budget.lambda_star");
      break;
    case BudgetRegime::nrw:
    case BudgetRegime::h_nrw:
      if (!std::isfinite(in.lambda_rate) || !(growth_exponent(in) > 0.0))
        throw ConfigError("needs lambda_rate > 2 lambda_star", "budget.lambda_rate");
      break;
  }
}

double cost_per_sample(const BudgetInput& in, double t) {
  switch (in.regime) {
    case BudgetRegime::critical: return in.kappa4 * t;
    case BudgetRegime::supercritical: return in.kappa4 * std::exp(in.lambda_star * t) / in.lambda_star;
    default: return in.kappa4;
  }
}

}  // namespace

double error_bound(const BudgetInput& in, double k, double t) {
  const double tail = in.kappa0 / (t * t);
  switch (in.regime) {
    case BudgetRegime::critical: return in.kappa * t / k + tail;
    case BudgetRegime::supercritical: return in.kappa / k + tail;
    default: return in.kappa * std::exp(growth_exponent(in) * t) / k + tail;
  }
}

BudgetPlan plan_budget(const BudgetInput& in) {
  check(in);
  const double eps2 = in.epsilon * in.epsilon;
  BudgetPlan p;
  if (in.regime == BudgetRegime::critical) {
    // Balance the two terms: kappa1 t / k = kappa0 / t^2 = eps^2 / 2.
    p.t = std::sqrt(2.0 * in.kappa0) / in.epsilon;
    p.k_continuous = in.kappa * p.t * p.t * p.t / in.kappa0;
    p.t_asymptotic = p.t;
  } else {
    // min k * cost(t) subject to the bound at equality. With
    // k = kappa e^{a t} / (eps^2 - kappa0/t^2) the stationarity condition is
    // eps^2 t^3 - kappa0 t - 2 kappa0 / c = 0, where c = lambda* for the
    // supercritical cost and c = a otherwise.
    const double c = in.regime == BudgetRegime::supercritical ? in.lambda_star : growth_exponent(in);
    const double a = growth_exponent(in);
    auto cubic = [&](double t) { return eps2 * t * t * t - in.kappa0 * t - 2.0 * in.kappa0 / c; };
    double lo = std::sqrt(in.kappa0) / in.epsilon;
    double hi = 2.0 * lo;
    while (cubic(hi) < 0.0) hi *= 2.0;
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(cubic, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                        iters);
    p.t = 0.5 * (root.first + root.second);
    p.k_continuous = in.kappa * std::exp(a * p.t) / (eps2 - in.kappa0 / (p.t * p.t));
    p.t_asymptotic = lo;
  }
  p.k = static_cast<std::uint64_t>(std::ceil(p.k_continuous * (1.0 - 1e-12)));
  if (static_cast<double>(p.k) < p.k_continuous) ++p.k;
  p.predicted_cost = p.k_continuous * cost_per_sample(in, p.t);
  p.error_bound = error_bound(in, static_cast<double>(p.k), p.t);
  return p;
}

}  // namespace ntmc
