// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ntmc/config.hpp"

namespace ntmc {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Invocation {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int workers = 0;
  bool serial = false;
};

// Collects output files and fields for the manifest.
struct Session {
  fs::path dir;
  std::string prefix;
  std::vector<std::string> outputs;
  json extra = json::object();
  int status = kExitOk;

  fs::path file(const std::string& suffix) {
    const fs::path p = dir / (prefix + suffix);
    outputs.push_back(p.string());
    return p;
  }
};

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write '" + p.string() + "'");
  return os;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << "\n"; }

RunOptions options(const Config& c, const Invocation& inv) {
  RunOptions o;
  o.seed = *c.seed;
  o.exec = inv.serial ? Exec::serial : Exec::parallel;
  o.population_cap = c.population_cap;
  return o;
}

json lambda_json(const EstimatorResult& r) {
  json j{{"estimator", r.estimator}, {"k", r.k}, {"t", r.t}, {"value", r.value}, {"std_error", r.std_error},
         {"survivors", r.survivors}};
  if (r.t > 0.0) {
    const LambdaEstimate e = lambda_estimate(r);
    j["defined"] = e.defined;
    if (e.defined) {
      j["lambda_hat"] = e.lambda;
      j["lambda_std_error"] = e.std_error;
    }
  }
  return j;
}

// nbp / nrw / hnrw on the time grid for every k.
int run_simulate(const Config& c, const Invocation& inv, Session& s, std::ostream& out, bool report_lambda) {
  const CrossSectionField& field = *c.field;
  const WeightFunction g = build_g(c.g, field);
  const RunOptions opt = options(c, inv);
  std::optional<HTransform> ht;
  if (c.mode == Mode::hnrw)
    ht.emplace(field, build_h(c.h, field), AngularQuadrature(c.h.n_angle, c.h.quadrature));
  std::vector<EstimatorResult> rows;
  for (std::uint64_t k : c.ks) {
    switch (c.mode) {
      case Mode::nbp: {
        const auto res = psi_br_grid(field, std::span<const WeightFunction>(&g, 1), c.times, c.initial, k, opt);
        rows.insert(rows.end(), res[0].begin(), res[0].end());
        break;
      }
      case Mode::nrw: {
        const auto res = psi_rw_grid(field, g, c.times, c.initial, k, opt);
        rows.insert(rows.end(), res.begin(), res.end());
        break;
      }
      case Mode::hnrw:
        for (double t : c.times) rows.push_back(psi_hrw(*ht, g, t, c.initial, k, opt));
        break;
      default: throw ConfigError("simulate needs mode nbp, nrw or hnrw", "run.mode");
    }
  }
  {
    auto os = open_out(s.file("_estimates.csv"));
    write_estimator_csv_header(os);
    for (const auto& r : rows) write_estimator_csv(os, r);
  }
  if (c.output.dump_events > 0) {
    const double horizon = c.horizon();
    if (c.mode == Mode::nbp) {
      auto os = open_out(s.file("_forest.csv"));
      write_forest_csv_header(os);
      const PhaseState roots[1] = {c.initial};
      NbpOptions no;
      no.population_cap = c.population_cap;
      for (std::uint64_t i = 0; i < c.output.dump_events && horizon > 0.0; ++i)
        write_forest_csv(os, i, simulate_nbp(field, roots, horizon, derive_seed(opt.seed, i), no));
    } else {
      auto os = open_out(s.file("_events.csv"));
      write_events_csv_header(os);
      for (std::uint64_t i = 0; i < c.output.dump_events && horizon > 0.0; ++i) {
        Rng rng(derive_seed(opt.seed, i));
        const NrwPath p = c.mode == Mode::nrw
                              ? simulate_nrw(field, NrwRates::alpha_pi, c.initial.r, c.initial.v, 0.0, horizon, rng)
                              : simulate_hnrw(*ht, c.initial.r, c.initial.v, 0.0, horizon, rng);
        write_events_csv(os, i, p);
      }
    }
  }
  if (!report_lambda) return kExitOk;
  json arr = json::array();
  bool all_defined = true;
  for (const auto& r : rows) {
    json j = lambda_json(r);
    if (j.contains("defined") && !j["defined"].get<bool>()) all_defined = false;
    arr.push_back(std::move(j));
  }
  write_json(s.file("_lambda.json"), arr);
  out << arr.dump(2) << "\n";
  if (!all_defined) {
    s.extra["undefined_estimates"] = true;
    return kExitUndefined;
  }
  return kExitOk;
}

int run_heatmap(const Config& c, const Invocation& inv, Session& s) {
  const Histogram h =
      occupation_histogram(*c.field, c.heatmap, c.horizon(), c.M, c.initial, c.ks.front(), options(c, inv));
  auto os = open_out(s.file("_heatmap.csv"));
  write_heatmap_csv(os, h);
  s.extra["histogram_total"] = h.total();
  return kExitOk;
}

int run_cost(const Config& c, const Invocation& inv, Session& s) {
  const auto opt = options(c, inv);
  const std::string& process = c.process;
  std::vector<CostPoint> pts;
  if (process == "nbp")
    pts = nbp_cost_grid(*c.field, 1.0, 1.0, c.times, c.initial, c.ks.front(), opt);
  else
    pts = nrw_cost_grid(*c.field, WeightFunction::constant(1.0), c.times, c.initial, c.ks.front(), opt);
  auto os = open_out(s.file("_cost.csv"));
  write_cost_csv_header(os);
  for (const auto& p : pts) write_cost_csv(os, p.t, p.cpu.mean, p.mem.mean, p.compensator.mean);
  return kExitOk;
}

int run_second_moment(const Config& c, const Invocation& inv, Session& s, std::ostream& out) {
  const WeightFunction g = build_g(c.g, *c.field);
  const SecondMomentRate r = second_moment_rate(*c.field, g, c.times, c.initial, c.ks.front(), options(c, inv));
  const json j{{"lambda1_hat", r.lambda1}, {"lambda_hat", r.lambda}, {"beta_min", r.beta_min},
               {"beta_max", r.beta_max}, {"lower_bound", r.lower_bound()}, {"upper_bound", r.upper_bound()}};
  write_json(s.file("_second_moment.json"), j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int run_smc(const Config& c, const Invocation& inv, Session& s, std::ostream& out) {
  const CrossSectionField& field = *c.field;
  std::optional<HTransform> ht;
  if (c.smc.dynamics == SmcDynamics::hnrw)
    ht.emplace(field, HFunction::power(build_h(c.h, field), c.smc.blend),
               AngularQuadrature(c.h.n_angle, c.h.quadrature));
  SmcOptions o;
  o.particles = c.smc.particles;
  o.delta = c.smc.delta;
  o.horizon = c.horizon();
  o.dynamics = c.smc.dynamics;
  o.exec = inv.serial ? Exec::serial : Exec::parallel;
  o.ess_threshold = c.smc.ess_threshold;
  o.population_cap = c.population_cap;
  if (c.root["run"] && c.root["run"]["initial"]) o.start = c.initial;
  std::vector<double> lambdas;
  bool extinct = false;
  for (int rep = 0; rep < c.smc.replicates; ++rep) {
    o.seed = rep == 0 ? *c.seed : derive_seed(*c.seed, static_cast<std::uint64_t>(rep));
    const SmcResult r = smc_run(field, o, ht ? &*ht : nullptr);
    if (rep == 0) {
      auto os = open_out(s.file("_smc.csv"));
      write_smc_csv_header(os);
      for (const auto& st : r.trace) write_smc_csv(os, st);
    }
    if (r.extinct) {
      extinct = true;
      break;
    }
    lambdas.push_back(r.lambda_hat);
  }
  json j{{"dynamics", to_string(c.smc.dynamics)}, {"particles", c.smc.particles}, {"delta", c.smc.delta},
         {"horizon", o.horizon}, {"extinct", extinct}, {"lambda_hat_replicates", lambdas}};
  if (!lambdas.empty()) {
    const auto m = stats::mean_se(lambdas);
    j["lambda_hat"] = m.mean;
    if (lambdas.size() > 1) j["lambda_std_error"] = m.std_error;
  }
  write_json(s.file("_smc.json"), j);
  out << j.dump(2) << "\n";
  return extinct ? kExitUndefined : kExitOk;
}

int run_slab_oracle(const Config& c, Session& s, std::ostream& out) {
  const slab::SlabConfig sc = slab_from_field(*c.field);
  const slab::SlabEigen e = slab::eigen(sc);
  const json j{{"theta", sc.theta()},
               {"regime", slab::to_string(e.regime())},
               {"x_star", e.x_star()},
               {"lambda_star", e.lambda_star()},
               {"fixed_point_residual", slab::fixed_point_residual(sc.theta(), e.x_star())},
               {"phi_phitilde", e.phi_phitilde()}};
  write_json(s.file("_oracle.json"), j);
  auto os = open_out(s.file("_phi.csv"));
  os << "r,phi_plus,phi_minus,phi_tilde_plus,phi_tilde_minus\n";
  const int n = 201;
  for (int i = 0; i < n; ++i) {
    const double r = -sc.L + 2.0 * sc.L * i / (n - 1);
    os << fmt::format("{},{},{},{},{}\n", r, e.phi(r, sc.v0), e.phi(r, -sc.v0), e.phi_tilde(r, sc.v0),
                      e.phi_tilde(r, -sc.v0));
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

int run_plan(const Config& c, Session& s, std::ostream& out) {
  const BudgetPlan p = plan_budget(c.budget);
  const json j{{"k", p.k},
               {"t", p.t},
               {"predicted_cost", p.predicted_cost},
               {"k_continuous", p.k_continuous},
               {"t_asymptotic", p.t_asymptotic},
               {"error_bound", p.error_bound},
               {"epsilon", c.budget.epsilon},
               {"regime", to_string(c.budget.regime)}};
  write_json(s.file("_plan.json"), j);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int run_validate(const Config& c, Session& s, std::ostream& out) {
  json j{{"valid", true}, {"mode", to_string(c.mode)}};
  if (c.field) {
    j["violations"] = c.field->validate();
    j["notes"] = c.field->notes();
    j["regions"] = c.field->domain().num_regions();
    j["dimension"] = c.field->dim();
    if (!c.field->validate().empty()) j["valid"] = false;
  }
  write_json(s.file("_validation.json"), j);
  out << j.dump(2) << "\n";
  return j["valid"].get<bool>() ? kExitOk : kExitConfig;
}

int dispatch(const Config& c, const Invocation& inv, Session& s, std::ostream& out) {
  if (inv.command == "validate-config") return run_validate(c, s, out);
  if (inv.command == "estimate-lambda") return run_simulate(c, inv, s, out, true);
  switch (c.mode) {
    case Mode::nbp:
    case Mode::nrw:
    case Mode::hnrw: return run_simulate(c, inv, s, out, false);
    case Mode::heatmap: return run_heatmap(c, inv, s);
    case Mode::cost: return run_cost(c, inv, s);
    case Mode::second_moment: return run_second_moment(c, inv, s, out);
    case Mode::smc: return run_smc(c, inv, s, out);
    case Mode::slab_oracle: return run_slab_oracle(c, s, out);
    case Mode::plan_budget: return run_plan(c, s, out);
  }
  return kExitInternal;
}

struct Failure {
  int code;
  std::string type;
  std::string key;
};

Failure classify(const std::exception& e) {
  if (auto* ce = dynamic_cast<const ConfigError*>(&e)) return {kExitConfig, "config", ce->key()};
  if (dynamic_cast<const ResourceError*>(&e)) return {kExitResource, "resource", {}};
  if (dynamic_cast<const ExtinctionError*>(&e)) return {kExitUndefined, "extinction", {}};
  if (dynamic_cast<const DomainError*>(&e)) return {kExitDomain, "domain", {}};
  if (dynamic_cast<const SingularRateError*>(&e)) return {kExitDomain, "singular_rate", {}};
  return {kExitInternal, "internal", {}};
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  Session s;
  s.dir = inv.out_dir.empty() ? fs::path("out") : fs::path(inv.out_dir);
  s.prefix = fs::path(inv.config_path).stem().string();
  json manifest{{"tool", "ntmc"},
                {"version", NTMC_VERSION},
                {"command", inv.command},
                {"config_path", inv.config_path},
                {"overrides", inv.overrides}};
  int code = kExitOk;
  try {
    std::vector<std::string> ov = inv.overrides;
    if (inv.command == "heatmap") ov.push_back("run.mode=heatmap");
    if (inv.command == "slab-oracle") ov.push_back("run.mode=slab-oracle");
    if (inv.command == "plan-budget") ov.push_back("run.mode=plan-budget");
    if (inv.command == "smc") ov.push_back("run.mode=smc");
    const Config c = load_config(inv.config_path, ov);
    if (inv.out_dir.empty()) s.dir = c.output.dir;
    s.prefix = c.output.prefix;
    if ((inv.command == "simulate" || inv.command == "estimate-lambda") && c.mode != Mode::nbp &&
        c.mode != Mode::nrw && c.mode != Mode::hnrw)
      throw ConfigError("this command needs mode nbp, nrw or hnrw", "run.mode");
    manifest["config_hash"] = fmt::format("{:016x}", config_hash(c.root));
    manifest["mode"] = to_string(c.mode);
    if (c.seed) manifest["seed"] = *c.seed;
    const int workers = inv.workers > 0 ? inv.workers : (c.workers > 0 ? c.workers : default_workers());
    set_workers(workers);
    manifest["workers"] = inv.serial ? 1 : workers;
    code = dispatch(c, inv, s, out);
    manifest["status"] = code == kExitOk ? "ok" : (code == kExitUndefined ? "undefined" : "error");
  } catch (const std::exception& e) {
    const Failure f = classify(e);
    code = f.code;
    manifest["status"] = "error";
    manifest["error"] = {{"type", f.type}, {"message", e.what()}};
    if (!f.key.empty()) manifest["error"]["key"] = f.key;
    err << "error (" << f.type << "): " << e.what() << "\n";
  }
  manifest["exit_code"] = code;
  manifest["outputs"] = s.outputs;
  if (!s.extra.empty()) manifest["details"] = s.extra;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_json(s.dir / (s.prefix + "_manifest.json"), manifest);
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitInternal;
  }
  return code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo engine for the neutron transport equation"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"run", "run the mode named in the config"},
      {"simulate", "estimate psi with the nbp, nrw or hnrw estimator"},
      {"estimate-lambda", "as simulate, and report lambda estimates"},
      {"heatmap", "occupation histogram of the branching process"},
      {"slab-oracle", "analytic eigenpair of the 1D slab"},
      {"plan-budget", "complexity-optimal (k, t)"},
      {"smc", "particle filter estimate of lambda"},
      {"validate-config", "parse and check a config"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", inv.config_path, "YAML config file")->required();
    sub->add_option("--set", inv.overrides, "override a config value, a.b=c")->allow_extra_args(false);
    sub->add_option("-o,--out-dir", inv.out_dir, "output directory (default: output.dir)");
    sub->add_option("-j,--workers", inv.workers, "worker threads (default: NTMC_WORKERS or all cores)");
    sub->add_flag("--serial", inv.serial, "use the serial reference kernels");
    sub->callback([&inv, name = name] { inv.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  return execute(inv, out, err);
}

}  // namespace ntmc
