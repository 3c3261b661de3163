// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include "ntmc/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <set>

namespace ntmc {

Mode parse_mode(const std::string& s) {
  if (s == "nbp") return Mode::nbp;
  if (s == "nrw") return Mode::nrw;
  if (s == "hnrw") return Mode::hnrw;
  if (s == "smc") return Mode::smc;
  if (s == "slab-oracle") return Mode::slab_oracle;
  if (s == "plan-budget") return Mode::plan_budget;
  if (s == "heatmap") return Mode::heatmap;
  if (s == "cost") return Mode::cost;
  if (s == "second-moment") return Mode::second_moment;
  throw ConfigError("unknown mode '" + s + "'", "run.mode");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::nbp: return "nbp";
    case Mode::nrw: return "nrw";
    case Mode::hnrw: return "hnrw";
    case Mode::smc: return "smc";
    case Mode::slab_oracle: return "slab-oracle";
    case Mode::plan_budget: return "plan-budget";
    case Mode::heatmap: return "heatmap";
    case Mode::cost: return "cost";
    case Mode::second_moment: return "second-moment";
  }
  return "?";
}

namespace {

// A mapping section with a fixed key set.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::initializer_list<const char*> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_ || node_.IsNull()) return;
    if (!node_.IsMap()) throw ConfigError("expected a mapping", path_);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) throw ConfigError("unknown key", join(key));
    }
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull(); }
  YAML::Node at(const char* key) const { return has(key) ? node_[key] : YAML::Node(YAML::NodeType::Undefined); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T get(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    return as<T>(node_[key], join(key));
  }
  template <class T>
  T need(const char* key) const {
    if (!has(key)) throw ConfigError("required key missing", join(key));
    return as<T>(node_[key], join(key));
  }

  template <class T>
  static T as(const YAML::Node& n, const std::string& path) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("cannot read value '" + dump(n) + "'", path);
    }
  }

 private:
  YAML::Node node_;
  std::string path_;

  static std::string dump(const YAML::Node& n) {
    YAML::Emitter e;
    e << YAML::Flow << n;
    return e.c_str();
  }
};

double positive(double x, const std::string& key) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("must be positive and finite", key);
  return x;
}

double non_negative(double x, const std::string& key) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("must be non-negative and finite", key);
  return x;
}

// Scalar or [x] / [x, y].
Vec2 read_vec(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return {Section::as<double>(n, path), 0.0};
  if (n.IsSequence() && (n.size() == 1 || n.size() == 2)) {
    const double x = Section::as<double>(n[0], path);
    const double y = n.size() == 2 ? Section::as<double>(n[1], path) : 0.0;
    return {x, y};
  }
  throw ConfigError("expected a number or a list of one or two numbers", path);
}

std::pair<double, double> read_pair(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError("expected [low, high]", path);
  const double a = Section::as<double>(n[0], path), b = Section::as<double>(n[1], path);
  if (!(a < b)) throw ConfigError("expected low < high", path);
  return {a, b};
}

template <class F>
auto with_key(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (!e.key().empty()) throw;
    throw ConfigError(e.what(), key);
  }
}

CrossSectionField parse_field(const YAML::Node& root) {
  const Section geo(root["geometry"], "geometry", {"domain", "velocity"});
  const Section dom(geo.at("domain"), "geometry.domain", {"type", "half_width", "splits", "half_x", "half_y", "inclusions"});
  const auto type = dom.get<std::string>("type", "interval");
  Domain domain = Domain::interval(1.0);
  if (type == "interval") {
    if (dom.has("half_x") || dom.has("half_y") || dom.has("inclusions"))
      throw ConfigError("rectangle keys on an interval domain", "geometry.domain");
    const double L = dom.get<double>("half_width", 1.0);
    const auto splits = dom.get<std::vector<double>>("splits", {});
    domain = with_key("geometry.domain", [&] { return Domain::interval(L, splits); });
  } else if (type == "rectangle") {
    if (dom.has("half_width") || dom.has("splits")) throw ConfigError("interval keys on a rectangle domain", "geometry.domain");
    std::vector<Circle> inc;
    const YAML::Node list = dom.at("inclusions");
    if (list && !list.IsSequence()) throw ConfigError("expected a list", "geometry.domain.inclusions");
    for (std::size_t i = 0; list && i < list.size(); ++i) {
      const std::string p = "geometry.domain.inclusions[" + std::to_string(i) + "]";
      const Section s(list[i], p, {"name", "center", "radius"});
      inc.push_back({read_vec(s.at("center"), p + ".center"), s.need<double>("radius"), s.get<std::string>("name", "")});
    }
    const double hx = dom.get<double>("half_x", 1.0), hy = dom.get<double>("half_y", hx);
    domain = with_key("geometry.domain", [&] { return Domain::rectangle(hx, hy, inc); });
  } else {
    throw ConfigError("unknown domain type '" + type + "'", "geometry.domain.type");
  }

  const Section vel(geo.at("velocity"), "geometry.velocity", {"type", "speed", "vmin", "vmax"});
  const auto vtype = vel.get<std::string>("type", domain.dim() == 1 ? "two_point" : "fixed_speed");
  VelocitySpace velocity = VelocitySpace::two_point(1.0);
  with_key("geometry.velocity", [&] {
    if (vtype == "two_point") velocity = VelocitySpace::two_point(vel.get<double>("speed", 1.0));
    else if (vtype == "fixed_speed") velocity = VelocitySpace::fixed_speed(vel.get<double>("speed", 1.0));
    else if (vtype == "annulus") velocity = VelocitySpace::annulus(vel.need<double>("vmin"), vel.need<double>("vmax"));
    else throw ConfigError("unknown velocity type '" + vtype + "'", "geometry.velocity.type");
    return 0;
  });

  const YAML::Node mats = root["materials"];
  if (!mats || !mats.IsSequence()) throw ConfigError("expected a list of region materials", "materials");
  std::vector<std::optional<Material>> by_region(static_cast<std::size_t>(domain.num_regions()));
  for (std::size_t i = 0; i < mats.size(); ++i) {
    const std::string p = "materials[" + std::to_string(i) + "]";
    const Section s(mats[i], p, {"region", "sigma_s", "sigma_f", "fission_mass"});
    const YAML::Node reg = s.at("region");
    RegionId id = -1;
    if (!reg) {
      if (domain.num_regions() != 1) throw ConfigError("required key missing", p + ".region");
      id = 0;
    } else {
      const auto text = Section::as<std::string>(reg, p + ".region");
      id = domain.find_region(text);
      if (id < 0) {
        try {
          std::size_t used = 0;
          const int n = std::stoi(text, &used);
          if (used == text.size()) id = n;
        } catch (...) {
        }
      }
      if (id < 0 || id >= domain.num_regions()) throw ConfigError("no region '" + text + "'", p + ".region");
    }
    auto& slot = by_region[static_cast<std::size_t>(id)];
    if (slot) throw ConfigError("region '" + domain.region_name(id) + "' given twice", p + ".region");
    Material m;
    m.sigma_s = non_negative(s.get<double>("sigma_s", 0.0), p + ".sigma_s");
    m.sigma_f = non_negative(s.get<double>("sigma_f", 0.0), p + ".sigma_f");
    m.fission_mass = non_negative(s.get<double>("fission_mass", 2.0), p + ".fission_mass");
    slot = m;
  }
  std::vector<Material> materials;
  for (std::size_t i = 0; i < by_region.size(); ++i) {
    if (!by_region[i])
      throw ConfigError("no material for region '" + domain.region_name(static_cast<RegionId>(i)) + "'", "materials");
    materials.push_back(*by_region[i]);
  }
  return with_key("materials", [&] { return CrossSectionField(domain, velocity, materials); });
}

}  // namespace

double Config::horizon() const { return *std::max_element(times.begin(), times.end()); }

void apply_override(YAML::Node& root, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("override must look like a.b=value", "--set");
  const std::string path(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception&) {
    throw ConfigError("cannot parse value '" + value + "'", path);
  }
  // Segments: dotted keys; list elements as name[i] or a bare index.
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    std::string seg = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const auto br = seg.find('[');
    if (br != std::string::npos && br > 0 && seg.back() == ']') {
      parts.push_back(seg.substr(0, br));
      parts.push_back(seg.substr(br + 1, seg.size() - br - 2));
    } else {
      parts.push_back(seg);
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts)
    if (p.empty()) throw ConfigError("empty key segment", path);
  auto as_index = [](const std::string& s) -> std::optional<std::size_t> {
    if (s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
  };
  YAML::Node cur = root;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    if (cur.IsSequence()) {
      const auto idx = as_index(parts[i]);
      if (!idx || *idx >= cur.size()) throw ConfigError("list index out of range", path);
      if (last) {
        cur[*idx] = parsed;
        return;
      }
      cur.reset(cur[*idx]);
      continue;
    }
    if (last) {
      cur[parts[i]] = parsed;
      return;
    }
    if (cur[parts[i]] && !cur[parts[i]].IsMap() && !cur[parts[i]].IsSequence() && !cur[parts[i]].IsNull())
      throw ConfigError("not a section", path);
    if (!cur[parts[i]] || cur[parts[i]].IsNull()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    cur.reset(cur[parts[i]]);
  }
}

Config parse_config(const YAML::Node& root) {
  if (!root.IsMap()) throw ConfigError("top level must be a mapping");
  const Section top(root, "", {"geometry", "materials", "run", "h", "smc", "budget", "heatmap", "output"});
  Config c;
  c.root = root;

  const Section run(root["run"], "run",
                    {"mode", "seed", "k", "t", "times", "M", "initial", "g", "population_cap", "workers", "process"});
  c.mode = parse_mode(run.get<std::string>("mode", "nbp"));
  if (run.has("seed")) c.seed = run.need<std::uint64_t>("seed");
  if (run.has("k")) {
    const YAML::Node k = run.at("k");
    c.ks = k.IsSequence() ? Section::as<std::vector<std::uint64_t>>(k, "run.k")
                          : std::vector<std::uint64_t>{Section::as<std::uint64_t>(k, "run.k")};
    if (c.ks.empty()) throw ConfigError("empty list", "run.k");
    for (auto k1 : c.ks)
      if (k1 < 1) throw ConfigError("must be at least 1", "run.k");
  }
  if (run.has("times") && run.has("t")) throw ConfigError("give either t or times", "run.times");
  if (run.has("times")) c.times = run.need<std::vector<double>>("times");
  if (run.has("t")) c.times = {run.need<double>("t")};
  if (c.times.empty()) throw ConfigError("empty list", "run.times");
  for (double t : c.times) non_negative(t, "run.times");
  c.M = run.get<int>("M", 100);
  if (c.M < 1) throw ConfigError("must be at least 1", "run.M");
  c.population_cap = run.get<std::uint64_t>("population_cap", kDefaultPopulationCap);
  if (c.population_cap < 1) throw ConfigError("must be at least 1", "run.population_cap");
  c.process = run.get<std::string>("process", "nbp");
  if (c.process != "nbp" && c.process != "nrw") throw ConfigError("unknown process '" + c.process + "'", "run.process");
  c.workers = run.get<int>("workers", 0);
  if (c.workers < 0) throw ConfigError("must be non-negative", "run.workers");

  const bool needs_field = c.mode != Mode::plan_budget;
  if (needs_field || root["geometry"]) c.field = parse_field(root);

  if (c.field) {
    const double speed = c.field->velocity().speed();
    c.initial = {Vec2{0.0, 0.0}, Vec2{speed, 0.0}};
    const Section init(run.at("initial"), "run.initial", {"r", "v", "angle"});
    if (init.has("r")) c.initial.r = read_vec(init.at("r"), "run.initial.r");
    if (init.has("v") && init.has("angle")) throw ConfigError("give either v or angle", "run.initial");
    if (init.has("v")) c.initial.v = read_vec(init.at("v"), "run.initial.v");
    if (init.has("angle")) {
      const double a = init.need<double>("angle");
      c.initial.v = {speed * std::cos(a), speed * std::sin(a)};
    }
    if (!c.field->domain().contains(c.initial.r)) throw ConfigError("position outside the domain", "run.initial.r");
    if (!c.field->velocity().member(c.initial.v, 1e-9))
      throw ConfigError("velocity outside the velocity space", "run.initial.v");
  }

  const Section g(run.at("g"), "run.g", {"type", "value", "x", "y", "sector"});
  c.g.type = g.get<std::string>("type", "constant");
  c.g.value = non_negative(g.get<double>("value", 1.0), "run.g.value");
  if (g.has("x")) std::tie(c.g.box.x0, c.g.box.x1) = read_pair(g.at("x"), "run.g.x");
  if (g.has("y")) std::tie(c.g.box.y0, c.g.box.y1) = read_pair(g.at("y"), "run.g.y");
  if (g.has("sector")) c.g.box.sector = read_pair(g.at("sector"), "run.g.sector");
  if (c.g.type != "constant" && c.g.type != "box" && c.g.type != "slab_phi" && c.g.type != "slab_phi_tilde")
    throw ConfigError("unknown weight type '" + c.g.type + "'", "run.g.type");

  const Section h(root["h"], "h", {"variant", "c", "c1", "c2", "r_shift", "epsilon", "base", "n_angle", "quadrature"});
  c.h.variant = h.get<std::string>("variant", "constant");
  c.h.c = positive(h.get<double>("c", 1.0), "h.c");
  c.h.c1 = positive(h.get<double>("c1", 1.0), "h.c1");
  c.h.c2 = positive(h.get<double>("c2", 1.0), "h.c2");
  if (h.has("r_shift")) c.h.r_shift = non_negative(h.need<double>("r_shift"), "h.r_shift");
  c.h.epsilon = h.get<double>("epsilon", 0.0);
  c.h.base = h.get<std::string>("base", "urts");
  c.h.n_angle = h.get<int>("n_angle", 128);
  const auto rule = h.get<std::string>("quadrature", "split_gauss");
  if (rule == "split_gauss") c.h.quadrature = AngularQuadrature::Rule::split_gauss;
  else if (rule == "trapezoid") c.h.quadrature = AngularQuadrature::Rule::trapezoid;
  else throw ConfigError("unknown rule '" + rule + "'", "h.quadrature");
  if (c.h.n_angle < 4) throw ConfigError("need at least 4 nodes", "h.n_angle");

  const Section smc(root["smc"], "smc", {"particles", "delta", "dynamics", "blend", "ess_threshold", "replicates"});
  c.smc.particles = smc.get<std::size_t>("particles", 1000);
  if (c.smc.particles < 2) throw ConfigError("need at least two particles", "smc.particles");
  c.smc.delta = positive(smc.get<double>("delta", 1.0), "smc.delta");
  c.smc.dynamics = parse_smc_dynamics(smc.get<std::string>("dynamics", "nbp"));
  c.smc.blend = smc.get<double>("blend", 0.5);
  if (!(c.smc.blend >= 0.0 && c.smc.blend <= 1.0)) throw ConfigError("must lie in [0, 1]", "smc.blend");
  c.smc.ess_threshold = smc.get<double>("ess_threshold", 0.0);
  if (!(c.smc.ess_threshold >= 0.0 && c.smc.ess_threshold <= 1.0))
    throw ConfigError("must lie in [0, 1]", "smc.ess_threshold");
  c.smc.replicates = smc.get<int>("replicates", 1);
  if (c.smc.replicates < 1) throw ConfigError("must be at least 1", "smc.replicates");

  const Section b(root["budget"], "budget",
                  {"regime", "epsilon", "kappa0", "kappa", "lambda_star", "lambda_rate", "kappa4"});
  c.budget.regime = parse_budget_regime(b.get<std::string>("regime", "critical"));
  c.budget.epsilon = b.get<double>("epsilon", 0.1);
  c.budget.kappa0 = b.get<double>("kappa0", 1.0);
  c.budget.kappa = b.get<double>("kappa", 1.0);
  c.budget.lambda_star = b.get<double>("lambda_star", 0.0);
  c.budget.lambda_rate = b.get<double>("lambda_rate", 0.0);
  c.budget.kappa4 = b.get<double>("kappa4", 1.0);

  const Section hm(root["heatmap"], "heatmap", {"nx", "ny", "sectors"});
  c.heatmap.nx = hm.get<int>("nx", 40);
  c.heatmap.ny = hm.get<int>("ny", c.field && c.field->dim() == 2 ? c.heatmap.nx : 1);
  c.heatmap.sectors = hm.get<int>("sectors", c.field && c.field->dim() == 1 ? 2 : 1);
  if (c.heatmap.nx < 1 || c.heatmap.ny < 1 || c.heatmap.sectors < 1)
    throw ConfigError("bin counts must be positive", "heatmap");
  if (c.field && c.field->dim() == 1 && c.heatmap.ny != 1) throw ConfigError("1D histograms use ny = 1", "heatmap.ny");

  const Section out(root["output"], "output", {"dir", "prefix", "dump_events"});
  c.output.dir = out.get<std::string>("dir", "out");
  c.output.prefix = out.get<std::string>("prefix", "");
  c.output.dump_events = out.get<std::uint64_t>("dump_events", 0);

  const bool simulates = c.mode != Mode::slab_oracle && c.mode != Mode::plan_budget;
  if (simulates && !c.seed) throw ConfigError("a seed is required for simulation modes", "run.seed");
  if (simulates && c.field) {
    const auto violations = c.field->validate();
    if (!violations.empty()) throw ConfigError(violations.front(), "materials");
  }
  // Build once so bad h / g settings fail at load time.
  if (c.field && (c.mode == Mode::hnrw || (c.mode == Mode::smc && c.smc.dynamics == SmcDynamics::hnrw)))
    build_h(c.h, *c.field);
  if (c.field) build_g(c.g, *c.field);
  return c;
}

Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open config file '" + path + "'");
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML syntax error: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  Config c = parse_config(root);
  if (c.output.prefix.empty()) c.output.prefix = std::filesystem::path(path).stem().string();
  return c;
}

std::uint64_t config_hash(const YAML::Node& root) {
  YAML::Emitter e;
  e << root;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* p = e.c_str(); *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 0x100000001b3ULL;
  }
  return h;
}

slab::SlabConfig slab_from_field(const CrossSectionField& field) {
  const Domain& d = field.domain();
  if (d.kind() != Domain::Kind::interval || field.velocity().kind() != VelocitySpace::Kind::two_point)
    throw ConfigError("the slab model needs an interval with two-point velocities", "geometry");
  const Material& m = field.material(0);
  for (const auto& o : field.materials())
    if (o.sigma_s != m.sigma_s || o.sigma_f != m.sigma_f || o.fission_mass != m.fission_mass)
      throw ConfigError("the slab model needs one homogeneous material", "materials");
  if (m.fission_mass != 2.0) throw ConfigError("the slab model has mean offspring 2", "materials[0].fission_mass");
  slab::SlabConfig s{d.half_x(), field.velocity().speed(), m.sigma_s, m.sigma_f};
  with_key("materials", [&] {
    s.validate();
    return 0;
  });
  return s;
}

HFunction build_h(const HSpec& spec, const CrossSectionField& field) {
  auto geometric = [&](const std::string& v) {
    if (v == "directional") return HFunction::directional(spec.c);
    if (v == "urts") {
      const Material& bg = field.material(0);
      double shift = 0.0;
      if (spec.r_shift) shift = *spec.r_shift;
      else if (bg.sigma_s > 0.0) shift = field.velocity().speed() / bg.sigma_s;
      return HFunction::urts(spec.c1, spec.c2, shift);
    }
    throw ConfigError("unknown base '" + v + "'", "h.base");
  };
  const std::string& v = spec.variant;
  if (v == "constant") return HFunction::constant(spec.c);
  if (v == "directional" || v == "urts") return geometric(v);
  if (v == "lifted") {
    if (!(spec.epsilon > 0.0)) throw ConfigError("lifted h needs epsilon > 0", "h.epsilon");
    return HFunction::lifted(geometric(spec.base), spec.epsilon);
  }
  if (v == "slab_h1" || v == "slab_h2" || v == "slab_h3" || v == "slab_phi") {
    const auto s = slab_from_field(field);
    if (v == "slab_h1") return HFunction::slab_h1(s.L, s.v0, s.sigma_s);
    if (v == "slab_h2") return HFunction::slab_h2(s.L);
    if (v == "slab_h3") return HFunction::slab_h3(s.L, s.v0, s.sigma_s);
    return HFunction::slab_eigen(slab::eigen(s));
  }
  throw ConfigError("unknown variant '" + v + "'", "h.variant");
}

WeightFunction build_g(const GSpec& spec, const CrossSectionField& field) {
  if (spec.type == "constant") return WeightFunction::constant(spec.value);
  if (spec.type == "box") return with_key("run.g", [&] { return WeightFunction::box(spec.box, spec.value); });
  const auto e = slab::eigen(slab_from_field(field));
  if (spec.type == "slab_phi") return WeightFunction::slab_phi(e, spec.value);
  return WeightFunction::slab_phi_tilde(e, spec.value);
}

}  // namespace ntmc
