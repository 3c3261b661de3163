// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/slab1d.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ntmc/error.hpp"

namespace ntmc::slab {

void SlabConfig::validate() const {
  if (!(L > 0.0 && v0 > 0.0 && sigma_s > 0.0 && sigma_f > 0.0) || !std::isfinite(theta()))
    throw ConfigError("slab parameters must be positive and finite");
}

CrossSectionField make_field(const SlabConfig& cfg) {
  cfg.validate();
  return CrossSectionField(Domain::interval(cfg.L), VelocitySpace::two_point(cfg.v0), {{cfg.sigma_s, cfg.sigma_f, 2.0}});
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::theta_gt_1: return "theta_gt_1";
    case Regime::theta_eq_1: return "theta_eq_1";
    case Regime::theta_lt_1: return "theta_lt_1";
  }
  return "?";
}

namespace {

double sinhc(double x) { return x == 0.0 ? 1.0 : std::sinh(x) / x; }
double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

template <class F>
double bisect(F f, double lo, double hi) {
  // f(lo) and f(hi) have opposite signs.
  const bool lo_neg = f(lo) < 0.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == lo_neg) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double fixed_point_residual(double theta, double x) {
  if (theta > 1.0) return std::abs(sinhc(x) - theta);
  if (theta < 1.0) return std::abs(sinc(x) - theta);
  return std::abs(x);
}

double solve_fixed_point(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("theta must be positive and finite");
  if (theta == 1.0) return 0.0;
  if (theta > 1.0) {
    double hi = 1.0;
    while (sinhc(hi) < theta) hi *= 2.0;
    return bisect([theta](double x) { return sinhc(x) - theta; }, 0.0, hi);
  }
  return bisect([theta](double x) { return sinc(x) - theta; }, 0.0, std::numbers::pi);
}

SlabEigen eigen(const SlabConfig& cfg) {
  cfg.validate();
  const double theta = cfg.theta();
  const double x = solve_fixed_point(theta);
  const double s = cfg.sigma_s, f = cfg.sigma_f;
  const double k = cfg.v0 * x / (2.0 * cfg.L);
  if (theta > 1.0) return SlabEigen(cfg, x, f - s - std::sqrt(s * s + k * k), Regime::theta_gt_1);
  if (theta < 1.0) {
    const double sg = std::cos(x) >= 0.0 ? 1.0 : -1.0;
    return SlabEigen(cfg, x, f - s - sg * std::sqrt(std::max(0.0, s * s - k * k)), Regime::theta_lt_1);
  }
  return SlabEigen(cfg, 0.0, f - 2.0 * s, Regime::theta_eq_1);
}

double SlabEigen::profile(double r) const {
  const double u = 1.0 - r / cfg_.L;
  switch (regime_) {
    case Regime::theta_eq_1: return u;
    case Regime::theta_gt_1: return std::sinh(0.5 * x_ * u) / std::sinh(0.5 * x_);
    case Regime::theta_lt_1: return std::sin(0.5 * x_ * u) / std::sin(0.5 * x_);
  }
  return 0.0;
}

double inner_phitilde(const SlabEigen& e, const std::function<double(double, double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  const double L = e.config().L, v0 = e.config().v0;
  auto integrand = [&](double r) { return f(r, v0) * e.phi_tilde(r, v0) + f(r, -v0) * e.phi_tilde(r, -v0); };
  return gauss_kronrod<double, 31>::integrate(integrand, -L, L, 15, 1e-13);
}

double SlabEigen::phi_phitilde() const {
  return inner_phitilde(*this, [this](double r, double v) { return phi(r, v); });
}

double verify_eigen(const SlabEigen& e, int grid, double step) {
  const auto& c = e.config();
  const double a = e.lambda_star() - c.sigma_f + c.sigma_s;
  double worst = 0.0;
  for (int i = 1; i < grid - 1; ++i) {
    const double r = -c.L + 2.0 * c.L * i / (grid - 1);
    const double fp = e.phi(r, c.v0), fm = e.phi(r, -c.v0);
    const double dfp = (e.phi(r + step, c.v0) - e.phi(r - step, c.v0)) / (2.0 * step);
    const double dfm = (e.phi(r + step, -c.v0) - e.phi(r - step, -c.v0)) / (2.0 * step);
    const double res_p = dfp - (a * fp - c.sigma_s * fm) / c.v0;
    const double res_m = dfm - (c.sigma_s * fp - a * fm) / c.v0;
    worst = std::max({worst, std::abs(res_p), std::abs(res_m)});
  }
  return worst;
}

VarianceConstants variance_constants(const SlabEigen& e, const std::function<double(double, double)>& g, double r,
                                     double v, bool g_is_phi_multiple) {
  VarianceConstants out;
  const double norm = e.phi_phitilde();
  const double sf = e.config().sigma_f;
  const double lam = e.lambda_star();
  // Normalised left eigenfunction: phi~ / <phi, phi~>.
  auto inner = [&](const std::function<double(double, double)>& f) { return inner_phitilde(e, f) / norm; };
  const double g_phit = inner(g);
  const double phi_rv = e.phi(r, v);
  // eta_f[f] = sigma_f E[N(N-1)] f^2 = 4 sigma_f f^2 for Poisson(2) at the parent velocity.
  const double eta_phi = inner([&](double x, double u) { return 4.0 * sf * e.phi(x, u) * e.phi(x, u); });
  out.C0 = g_phit * phi_rv;
  out.C1 = eta_phi * g_phit * g_phit * phi_rv;
  if (lam > 0.0) {
    // Uses psi_s[f] ~ e^{lam s} <f, phi~> phi, which is not exact here.
    out.C2 = g_phit * g_phit * (eta_phi * phi_rv / lam - phi_rv * phi_rv);
    out.approximate = true;
  } else if (lam < 0.0) {
    const double g2 = inner([&](double x, double u) { return g(x, u) * g(x, u); });
    double tail = 0.0;
    if (g_is_phi_multiple) {
      // g = c phi: psi_s[g] = e^{lam s} g, so the integral is <phi~, eta_f[g]> / (-lam).
      const double eta_g = inner([&](double x, double u) { return 4.0 * sf * g(x, u) * g(x, u); });
      tail = eta_g / (-lam);
    } else {
      tail = g_phit * g_phit * eta_phi / (-lam);
      out.approximate = true;
    }
    out.C3 = phi_rv * (g2 + tail);
  }
  return out;
}

double cost_constant(const SlabEigen& e, double f, double g, double r, double v) {
  const auto& c = e.config();
  // pi_s[f] = f and pi_f[g] = 2 g for constants.
  const double rate = c.sigma_s * f + c.sigma_f * 2.0 * g;
  const double ip = inner_phitilde(e, [rate](double, double) { return rate; });
  return ip * e.phi(r, v) / e.phi_phitilde();
}

}  // namespace ntmc::slab
