// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ntmc/cost.hpp"
#include "ntmc/estimators.hpp"
#include "ntmc/smc.hpp"

namespace ntmc {

// Run modes. simulate-style modes estimate psi on a time grid.
enum class Mode { nbp, nrw, hnrw, smc, slab_oracle, plan_budget, heatmap, cost, second_moment };
Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

struct HSpec {
  std::string variant = "constant";
  double c = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  std::optional<double> r_shift;  // default v0 / sigma_s of the background
  double epsilon = 0.0;
  std::string base = "urts";      // for lifted
  int n_angle = 128;
  AngularQuadrature::Rule quadrature = AngularQuadrature::Rule::split_gauss;
};

struct GSpec {
  std::string type = "constant";
  double value = 1.0;
  WeightFunction::Box box;
};

struct SmcSpec {
  std::size_t particles = 1000;
  double delta = 1.0;
  SmcDynamics dynamics = SmcDynamics::nbp;
  double blend = 0.5;
  double ess_threshold = 0.0;
  int replicates = 1;
};

struct OutputSpec {
  std::string dir = "out";
  std::string prefix;
  std::uint64_t dump_events = 0;  // cycles written as event / forest CSV
};

struct Config {
  YAML::Node root;  // after overrides
  Mode mode = Mode::nbp;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> ks{1000};
  std::vector<double> times{10.0};
  int M = 100;
  PhaseState initial{};
  GSpec g;
  std::uint64_t population_cap = kDefaultPopulationCap;
  std::string process = "nbp";  // cost mode: nbp or nrw
  int workers = 0;  // 0: NTMC_WORKERS or the OpenMP default
  HSpec h;
  SmcSpec smc;
  BudgetInput budget;
  PhaseBins heatmap;
  OutputSpec output;
  std::optional<CrossSectionField> field;

  double horizon() const;
};

// a.b.c=value; the value is parsed as YAML, so lists like [1, 2] work.
void apply_override(YAML::Node& root, std::string_view assignment);

Config parse_config(const YAML::Node& root);
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// FNV-1a of the canonical YAML dump.
std::uint64_t config_hash(const YAML::Node& root);

// Slab parameters when the field is a homogeneous interval with two-point
// velocities and mean offspring 2; ConfigError otherwise.
slab::SlabConfig slab_from_field(const CrossSectionField& field);

HFunction build_h(const HSpec& spec, const CrossSectionField& field);
WeightFunction build_g(const GSpec& spec, const CrossSectionField& field);

}  // namespace ntmc
