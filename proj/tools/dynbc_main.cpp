#include "dynbc/experiment.hpp"
#include "dynbc/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <exception>

namespace {

// exit codes: 0 success, 1 verification/runtime failure, 2 usage error
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

void print_error(const std::string& category, const std::string& message) {
  nlohmann::json err = {{"error", {{"category", category}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", err.dump().c_str());
}

int cmd_run(const std::string& config_path, const std::string& output_dir, long seed) {
  dynbc::ExperimentConfig cfg;
  try {
    cfg = dynbc::parse_experiment_file(config_path);
  } catch (const dynbc::ConfigError& e) {
    print_error("config", e.what());
    return kUsage;
  }
  const std::string dir = output_dir.empty() ? cfg.output_dir : output_dir;
  const std::uint64_t used_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : cfg.seed;
  try {
    const auto outcome = dynbc::run_experiment(cfg, dir, used_seed);
    std::printf("%s\n", outcome.headline.c_str());
    std::printf("manifest: %s\n", outcome.manifest_path.c_str());
    return kOk;
  } catch (const std::invalid_argument& e) {
    print_error("invalid-argument", e.what());
    return kFailure;
  } catch (const std::exception& e) {
    print_error("solver-failure", e.what());
    return kFailure;
  }
}

int cmd_verify(const std::string& suite) {
  std::vector<dynbc::CheckResult> results;
  try {
    results = dynbc::run_verify_suite(suite);
  } catch (const std::invalid_argument& e) {
    print_error("usage", e.what());
    return kUsage;
  }
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    all = all && r.passed;
  }
  return all ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat equations with dynamic boundary conditions: simulation and null control"};
  app.require_subcommand(1);

  std::string config_path, output_dir, suite;
  long seed = -1;

  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "TOML experiment config")->required();
  run->add_option("--output-dir", output_dir, "override the output directory");
  run->add_option("--seed", seed, "override the config seed");

  auto* verify = app.add_subcommand("verify", "run a named verification suite");
  verify->add_option("suite", suite, "one of: operators evolution duality observability hum weighted semilinear carleman")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (run->parsed()) return cmd_run(config_path, output_dir, seed);
  return cmd_verify(suite);
}
