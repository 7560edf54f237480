#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace congestion {

struct TraceRow {
  long long episode = 0;
  double gap = 0.0;           // exact per-episode Nash gap
  double cum_regret = 0.0;    // prefix sum of gap (x tau for Frank-Wolfe runs)
  long long ms = 0;           // deterministically 0; see README
  std::vector<double> player_rewards;
  int stage_rounds = 0;
  bool converged = true;
};

struct RegretTrace {
  std::uint64_t seed = 0;
  double regret_multiplier = 1.0;  // tau for Frank-Wolfe, 1 otherwise
  std::vector<TraceRow> rows;

  double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
  // Smallest gap over episodes and the episode (1-based) achieving it.
  std::pair<double, long long> best_iterate() const;
};

// CSV with the normative column order:
// k,gap,cum_regret,ms,reward_p1..reward_pm,stage_rounds,converged
std::string trace_to_csv(const RegretTrace& trace, int num_players);

struct TraceCheck {
  bool ok = true;
  std::string message;
};

// Re-checks trace integrity from CSV text: non-negative gaps and the
// cumulative column equal to prefix sums of gap (a constant per-trace
// multiplier is inferred from the data) to 1e-9.
TraceCheck verify_trace_csv(const std::string& csv);

}  // namespace congestion
