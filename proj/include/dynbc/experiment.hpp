#pragma once

#include "dynbc/config.hpp"

namespace dynbc {

struct ExperimentOutcome {
  int exit_code = 0;
  std::string manifest_path;
  std::vector<std::string> artifacts;
  std::string headline;  // short human-readable summary
};

/// Executes one experiment config: builds the problem, dispatches on the
/// mode, writes CSV/JSON artifacts plus a manifest.json into the output
/// directory. Deterministic for a fixed config and seed.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& output_dir,
                                 std::uint64_t seed);

}  // namespace dynbc
