#pragma once

#include <string>
#include <vector>

namespace dynbc {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using Suite = std::vector<CheckResult>;

// Acceptance checks on pinned desk-scale configurations.
Suite check_operator_structure();
Suite check_conservation_stability();
Suite check_spectral_regression();
Suite check_discrete_duality();
Suite check_observability();
Suite check_penalized_hum();
Suite check_weighted_minimizer();
Suite check_carleman_diagnostic();
Suite check_semilinear();
Suite check_reproducibility();

std::vector<std::string> verify_suite_names();

/// Runs one named suite; throws std::invalid_argument listing the valid
/// names when `suite` is unknown.
Suite run_verify_suite(const std::string& suite);

/// All acceptance criteria, one aggregated result per criterion.
std::vector<CheckResult> run_acceptance();

}  // namespace dynbc
