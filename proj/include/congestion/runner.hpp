#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace congestion {

struct ExperimentConfig {
  std::string spec_path;
  std::string algorithm;  // nash-ucb-semi | nash-ucb-bandit | fw-semi | fw-bandit |
                          // nash-vi-semi | nash-vi-bandit
  long long episodes = 0;  // K
  std::vector<std::uint64_t> seeds;
  std::string output_dir = ".";

  // Algorithm-specific overrides; unset fields keep the built-in defaults.
  std::optional<double> delta;
  std::optional<double> eps_stage;
  std::optional<double> gamma;
  std::optional<double> nu;
  std::optional<long long> tau;
  std::optional<double> design_tol;
};

// JSON keys mirror the field names: spec_path, algorithm, K, seeds,
// output_dir, delta, eps_stage, gamma, nu, tau, design_tol.
ExperimentConfig config_from_json(const std::string& text);

struct SeedSummary {
  std::uint64_t seed = 0;
  double final_regret = 0.0;
  double best_iterate_gap = 0.0;
  long long best_iterate_episode = 0;
};

// Runs every seed (in parallel up to CONGESTION_LAB_THREADS), writes one
// trace_<algorithm>_<seed>.csv per seed plus summary.json into output_dir,
// and returns the per-seed summaries in config order. Output bytes are a
// pure function of (config, seeds).
std::vector<SeedSummary> run_experiment(const ExperimentConfig& cfg);

}  // namespace congestion
