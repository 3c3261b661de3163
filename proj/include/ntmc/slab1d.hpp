// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>

#include "ntmc/xsection.hpp"

namespace ntmc::slab {

// Homogeneous slab (-L, L) with velocities {-v0, +v0}, flip scattering and
// fission yielding Poisson(2) children at the parent velocity.
struct SlabConfig {
  double L = 1.0;
  double v0 = 1.0;
  double sigma_s = 0.5;
  double sigma_f = 1.0;

  double theta() const { return v0 / (2.0 * L * sigma_s); }
  void validate() const;
};

// Field matching the slab model (single region, m_f = 2).
CrossSectionField make_field(const SlabConfig& cfg);

enum class Regime { theta_gt_1, theta_eq_1, theta_lt_1 };
std::string to_string(Regime r);

// sinh(x)/x = theta for theta > 1, sin(x)/x = theta on (0, pi) for theta < 1,
// and 0 for theta = 1. Bisection to 1e-13.
double solve_fixed_point(double theta);
double fixed_point_residual(double theta, double x);

class SlabEigen {
 public:
  SlabEigen(const SlabConfig& cfg, double x_star, double lambda_star, Regime regime)
      : cfg_(cfg), x_(x_star), lambda_(lambda_star), regime_(regime) {}

  const SlabConfig& config() const { return cfg_; }
  double lambda_star() const { return lambda_; }
  double x_star() const { return x_; }
  Regime regime() const { return regime_; }

  // Right eigenfunction on the +v0 branch; phi(r, -v0) = phi(-r, +v0).
  double profile(double r) const;
  // v is read by sign only.
  double phi(double r, double v) const { return v > 0.0 ? profile(r) : profile(-r); }
  double phi_tilde(double r, double v) const { return v > 0.0 ? profile(-r) : profile(r); }

  // <phi, phi~> with counting measure on {-v0, v0}.
  double phi_phitilde() const;

 private:
  SlabConfig cfg_;
  double x_ = 0.0;
  double lambda_ = 0.0;
  Regime regime_ = Regime::theta_eq_1;
};

SlabEigen eigen(const SlabConfig& cfg);

// Max central-difference residual of the eigen ODE on an interior grid.
double verify_eigen(const SlabEigen& e, int grid = 201, double step = 1e-5);

// <f, phi~> = sum over +-v0 of the integral over (-L, L); f takes (r, v).
double inner_phitilde(const SlabEigen& e, const std::function<double(double, double)>& f);

struct VarianceConstants {
  double C0 = 0.0;
  double C1 = 0.0;  // critical
  double C2 = 0.0;  // supercritical
  double C3 = 0.0;  // subcritical
  bool approximate = false;
};

// Constants of the branching estimator's variance asymptotics with
// <phi, phi~> normalised to 1. `g_is_phi_multiple` marks g = c * phi, for
// which the subcritical constant is exact.
VarianceConstants variance_constants(const SlabEigen& e, const std::function<double(double, double)>& g, double r,
                                     double v, bool g_is_phi_multiple = false);

// Leading cost constant for C_t[f, g] with constant f, g:
// <sigma_s pi_s[f] + sigma_f pi_f[g], phi~> phi(r, v) / <phi, phi~>.
double cost_constant(const SlabEigen& e, double f, double g, double r, double v);

}  // namespace ntmc::slab
