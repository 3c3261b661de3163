// Copyright 2026 The ntmc Authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntmc/cli.hpp"
#include "ntmc/config.hpp"

using namespace ntmc;
namespace fs = std::filesystem;

namespace {
const char* kSlab = R"(geometry:
  domain: {type: interval, half_width: 1.0}
  velocity: {type: two_point, speed: 1.0}
materials:
  - {sigma_s: 0.5, sigma_f: 1.0, fission_mass: 2}
run:
  mode: nbp
  seed: 7
  k: 50
  times: [1, 2]
  initial: {r: 0.0, v: 1.0}
output: {dir: out, prefix: slab}
)";

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ntmc_unit_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "ntmc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  return rc;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  return nlohmann::json::parse(is);
}
}  // namespace

TEST_SUITE("config_cli") {
  TEST_CASE("parse a slab config") {
    const Config c = parse_config(YAML::Load(kSlab));
    CHECK(c.mode == Mode::nbp);
    CHECK(c.seed == 7u);
    CHECK(c.ks == std::vector<std::uint64_t>{50});
    CHECK(c.times == std::vector<double>{1.0, 2.0});
    REQUIRE(c.field);
    CHECK(c.field->material(0).sigma_f == 1.0);
    const auto s = slab_from_field(*c.field);
    CHECK(s.theta() == doctest::Approx(1.0));
  }

  TEST_CASE("unknown keys name their path") {
    YAML::Node root = YAML::Load(kSlab);
    root["run"]["kk"] = 3;
    try {
      parse_config(root);
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "run.kk");
    }
  }

  TEST_CASE("overrides") {
    YAML::Node root = YAML::Load(kSlab);
    apply_override(root, "run.times=[3, 4, 5]");
    apply_override(root, "materials[0].sigma_f=1.2");
    apply_override(root, "materials.0.sigma_s=0.6");
    const Config c = parse_config(root);
    CHECK(c.times.size() == 3);
    CHECK(c.field->material(0).sigma_f == 1.2);
    CHECK(c.field->material(0).sigma_s == 0.6);
    CHECK_THROWS_AS(apply_override(root, "materials[3].sigma_f=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(root, "no_equals"), ConfigError);
  }

  TEST_CASE("config hash tracks content") {
    YAML::Node a = YAML::Load(kSlab), b = YAML::Load(kSlab);
    CHECK(config_hash(a) == config_hash(b));
    apply_override(b, "run.seed=8");
    CHECK(config_hash(a) != config_hash(b));
  }

  TEST_CASE("invalid values") {
    YAML::Node root = YAML::Load(kSlab);
    apply_override(root, "materials[0].sigma_s=-1");
    CHECK_THROWS_AS(parse_config(root), ConfigError);
    YAML::Node r2 = YAML::Load(kSlab);
    apply_override(r2, "run.initial.r=2.0");
    CHECK_THROWS_AS(parse_config(r2), ConfigError);
    YAML::Node r3 = YAML::Load(kSlab);
    apply_override(r3, "run.mode=warp");
    CHECK_THROWS_AS(parse_config(r3), ConfigError);
  }

  TEST_CASE("four-rod geometry with named regions") {
    const char* text = R"(geometry:
  domain:
    type: rectangle
    half_x: 1
    half_y: 1
    inclusions:
      - {name: rod_ne, center: [0.5, 0.5], radius: 0.2}
  velocity: {type: fixed_speed, speed: 1}
materials:
  - {region: background, sigma_s: 1.0, sigma_f: 0.1, fission_mass: 2}
  - {region: rod_ne, sigma_s: 0.5, sigma_f: 1.0, fission_mass: 2}
run: {mode: nrw, seed: 1, k: 10, t: 1, initial: {r: [0, 0], angle: 0}}
)";
    const Config c = parse_config(YAML::Load(text));
    CHECK(c.field->dim() == 2);
    CHECK(c.field->domain().find_region("rod_ne") == 1);
    CHECK(c.field->material(1).sigma_f == 1.0);
  }

  TEST_CASE("cli writes outputs and a manifest") {
    TempDir d;
    const fs::path cfg = d.write("slab.yaml", kSlab);
    const std::string out = (d.path / "o").string();
    CHECK(cli({"simulate", cfg.string(), "-o", out}) == 0);
    CHECK(fs::exists(fs::path(out) / "slab_estimates.csv"));
    const auto m = read_json(fs::path(out) / "slab_manifest.json");
    CHECK(m["status"] == "ok");
    CHECK(m["seed"] == 7);
    CHECK(m["exit_code"] == 0);

    std::string json_text;
    CHECK(cli({"slab-oracle", cfg.string(), "-o", out}, &json_text) == 0);
    const auto o = nlohmann::json::parse(json_text);
    CHECK(o["lambda_star"] == 0.0);
    CHECK(o["regime"] == "theta_eq_1");
  }

  TEST_CASE("serial and parallel runs write identical estimates") {
    TempDir d;
    const fs::path cfg = d.write("slab.yaml", kSlab);
    const fs::path a = d.path / "a", b = d.path / "b";
    REQUIRE(cli({"simulate", cfg.string(), "-o", a.string(), "--serial"}) == 0);
    REQUIRE(cli({"simulate", cfg.string(), "-o", b.string(), "-j", "2"}) == 0);
    std::ifstream fa(a / "slab_estimates.csv"), fb(b / "slab_estimates.csv");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
  }

  TEST_CASE("config errors exit with code 2 and name the key") {
    TempDir d;
    const fs::path cfg = d.write("slab.yaml", kSlab);
    const std::string out = (d.path / "o").string();
    CHECK(cli({"simulate", cfg.string(), "-o", out, "--set", "materials[0].sigma_q=1"}) == kExitConfig);
    const auto m = read_json(fs::path(out) / "slab_manifest.json");
    CHECK(m["status"] == "error");
    CHECK(m["error"]["key"] == "materials[0].sigma_q");
    CHECK(cli({"simulate", (d.path / "missing.yaml").string(), "-o", out}) == kExitConfig);
    CHECK(cli({"frobnicate"}) == kExitConfig);
  }

  TEST_CASE("plan-budget") {
    TempDir d;
    const fs::path cfg = d.write("plan.yaml", std::string(kSlab) + "budget: {regime: critical, kappa0: 1, kappa: 1, epsilon: 0.1}\n");
    std::string text;
    CHECK(cli({"plan-budget", cfg.string(), "-o", (d.path / "o").string()}, &text) == 0);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["k"] == 2829);
  }
}
