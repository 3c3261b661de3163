// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ntmc/slab1d.hpp"
#include "ntmc/xsection.hpp"

namespace ntmc::testing {

inline slab::SlabConfig slab_cfg(double sigma_f, double sigma_s = 0.5, double v0 = 1.0, double L = 1.0) {
  return {L, v0, sigma_s, sigma_f};
}
inline slab::SlabConfig critical_slab() { return slab_cfg(1.0); }
inline slab::SlabConfig supercritical_slab() { return slab_cfg(1.2); }
inline slab::SlabConfig subcritical_slab() { return slab_cfg(0.6); }

// Square [-1, 1]^2 with four fuel rods.
inline CrossSectionField four_rod() {
  std::vector<Circle> rods{{{0.5, 0.5}, 0.2, "rod_ne"},
                           {{-0.5, 0.5}, 0.2, "rod_nw"},
                           {{-0.5, -0.5}, 0.2, "rod_sw"},
                           {{0.5, -0.5}, 0.2, "rod_se"}};
  std::vector<Material> mats{{1.0, 0.1, 2.0}};
  for (int i = 0; i < 4; ++i) mats.push_back({0.5, 1.0, 2.0});
  return CrossSectionField(Domain::rectangle(1.0, 1.0, rods), VelocitySpace::fixed_speed(1.0), mats);
}

}  // namespace ntmc::testing
