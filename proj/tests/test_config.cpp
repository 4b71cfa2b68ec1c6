#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynbc/experiment.hpp"
#include "dynbc/verify.hpp"

#include <filesystem>
#include <fstream>

using namespace dynbc;

namespace {

const char* kMinimalSimulate = R"(
[geometry]
kind = "disk"
n_r = 8
n_theta = 24

[physics]
d = 1.0
delta = 1.0

[time]
T = 0.5
steps = 40

[control]
mode = "simulate"

[initial]
bulk = 1.0
surface = 1.0
)";

}  // namespace

TEST_CASE("toml subset parsing") {
  const TomlDocument doc = TomlDocument::parse(R"(
# comment
title = "experiment"   # trailing comment
count = 42
ratio = 2.5e-1
flag = true
values = [1.0, 2.0,
          3.0]
names = ["a", "b"]

[block.sub]
key = -7
)");
  CHECK(doc.get_string("title") == "experiment");
  CHECK(doc.get_integer("count") == 42);
  CHECK(doc.get_number("ratio") == doctest::Approx(0.25));
  CHECK(doc.get_bool("flag"));
  CHECK(doc.get_number_array("values") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(doc.get_string_array("names") == std::vector<std::string>{"a", "b"});
  CHECK(doc.get_integer("block.sub.key") == -7);
  CHECK(doc.has_block("block.sub"));
  CHECK(!doc.has_block("missing"));
  CHECK(doc.get_number_or("absent", 9.0) == 9.0);
}

TEST_CASE("toml errors name the offending field") {
  try {
    TomlDocument::parse("key = [1, 2");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(e.field == "key");
  }
  CHECK_THROWS_AS(TomlDocument::parse("a = 1\na = 2"), ConfigError);
  CHECK_THROWS_AS(TomlDocument::parse("x = oops"), ConfigError);
  try {
    const TomlDocument doc = TomlDocument::parse("n = 2.5");
    doc.get_integer("n");
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(e.field == "n");
  }
}

TEST_CASE("missing blocks are reported by name") {
  const std::string no_time = R"(
[geometry]
kind = "disk"
[physics]
d = 1.0
[control]
mode = "simulate"
)";
  try {
    parse_experiment_config(TomlDocument::parse(no_time));
    FAIL("expected error");
  } catch (const ConfigError& e) {
    CHECK(e.field == "time");
  }

  const std::string bad_mode = R"(
[geometry]
kind = "disk"
[physics]
d = 1.0
[time]
T = 1.0
steps = 10
[control]
mode = "paint"
)";
  CHECK_THROWS_AS(parse_experiment_config(TomlDocument::parse(bad_mode)), ConfigError);
}

TEST_CASE("minimal simulate run produces a manifest and trajectory") {
  namespace fs = std::filesystem;
  const ExperimentConfig cfg = parse_experiment_config(TomlDocument::parse(kMinimalSimulate));
  const fs::path dir = fs::temp_directory_path() / "dynbc_test_run";
  fs::remove_all(dir);
  const ExperimentOutcome out = run_experiment(cfg, dir.string(), 1);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "trajectory.csv"));

  std::ifstream m(dir / "manifest.json");
  std::string text((std::istreambuf_iterator<char>(m)), std::istreambuf_iterator<char>());
  CHECK(text.find("mass_drift") != std::string::npos);
  // constants are conserved exactly; the recorded drift is solver noise
  const auto pos = text.find("\"mass_drift\": ");
  const double drift = std::stod(text.substr(pos + 14));
  CHECK(drift <= 1e-11);
  fs::remove_all(dir);
}

TEST_CASE("hum run records the terminal identity") {
  namespace fs = std::filesystem;
  const std::string hum_config = std::string(kMinimalSimulate) + R"(
[weights]
eps = 1e-3
)";
  ExperimentConfig cfg = parse_experiment_config(TomlDocument::parse(hum_config));
  cfg.mode = RunMode::hum;
  cfg.omega = DiskRegion{0, 0, 0.5};
  cfg.has_omega = true;
  const fs::path dir = fs::temp_directory_path() / "dynbc_test_hum";
  fs::remove_all(dir);
  run_experiment(cfg, dir.string(), 1);
  std::ifstream m(dir / "manifest.json");
  std::string text((std::istreambuf_iterator<char>(m)), std::istreambuf_iterator<char>());
  CHECK(text.find("terminal_norm") != std::string::npos);
  CHECK(text.find("identity_residual") != std::string::npos);
  CHECK(fs::exists(dir / "control.csv"));
  fs::remove_all(dir);
}

TEST_CASE("expression-table potentials: constant and nodal entries") {
  const std::string text = std::string(kMinimalSimulate) + R"(
[physics.a]
type = "table"
times = [0.0, 0.25]
values = [0.5, -1.5]

[physics.b]
type = "table"
times = [0.0]
values = [[1.0, 2.0, 3.0]]
)";
  const ExperimentConfig cfg = parse_experiment_config(TomlDocument::parse(text));
  const Mesh mesh = build_interval_mesh(2, 1.0);  // 3 bulk nodes, 2 boundary
  ExperimentConfig small = cfg;
  small.geometry_kind = MeshKind::interval;
  small.n = 2;
  const PotentialPair pot = small.build_potentials(mesh);
  CHECK(pot.time_dependent);
  CHECK(pot.eval_a(0.1, mesh.n_bulk())[0] == 0.5);
  CHECK(pot.eval_a(0.9, mesh.n_bulk())[0] == -1.5);
  // nodal surface table with the wrong node count is rejected at evaluation
  CHECK_THROWS_AS(pot.eval_b(0.1, mesh.n_boundary()), ConfigError);
  CHECK(pot.bound == 3.0);

  // matching nodal count evaluates through
  const std::string good = std::string(kMinimalSimulate) + R"(
[physics.b]
type = "table"
times = [0.0]
values = [[1.0, 2.0]]
)";
  ExperimentConfig cfg2 = parse_experiment_config(TomlDocument::parse(good));
  cfg2.geometry_kind = MeshKind::interval;
  cfg2.n = 2;
  const PotentialPair pot2 = cfg2.build_potentials(mesh);
  const Eigen::VectorXd bv = pot2.eval_b(0.3, 2);
  CHECK(bv[0] == 1.0);
  CHECK(bv[1] == 2.0);
}

TEST_CASE("verify suite dispatch") {
  CHECK_THROWS_AS(run_verify_suite("bogus"), std::invalid_argument);
  CHECK(verify_suite_names().size() == 8);
  // the cheap suite runs end to end
  const Suite ops = run_verify_suite("operators");
  for (const auto& r : ops) CHECK(r.passed);
}
