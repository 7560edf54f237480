#pragma once

#include <functional>
#include <vector>

namespace congestion {

// One action index per player; the stage solver only ever handles
// deterministic product policies.
using DeterministicProfile = std::vector<int>;

// Full-information evaluator for a stage game. `payoff` must be deterministic
// and bounded by r_max in absolute value. When the game is congestion
// structured (every player's payoff is a sum of per-facility terms g(f, n)
// over her chosen facilities, g shared across players), `facility_value` and
// `facility_members` enable the O(sum|A_i| * F) best-response scan.
struct StagePayoffOracle {
  int num_players = 0;
  std::vector<std::size_t> action_counts;
  std::function<double(int player, const DeterministicProfile&)> payoff;
  double r_max = 1.0;

  // Optional congestion structure.
  std::function<double(int facility, int count)> facility_value;  // g(f, n)
  std::function<const std::vector<int>&(int player, int action)> facility_members;
  int num_facilities = 0;

  bool congestion_structured() const {
    return static_cast<bool>(facility_value) && static_cast<bool>(facility_members);
  }
};

struct GreedyResult {
  DeterministicProfile profile;
  double achieved_gap = 0.0;
  int rounds_used = 0;
  bool converged = false;
};

// Greedy best-response dynamics: at most ceil(m * r_max / eps) rounds, each
// round switching the single player with the largest improvement. On a
// potential game convergence is guaranteed; otherwise the cap may hit and the
// profile with the smallest observed max_i Delta_i is returned with
// converged = false.
GreedyResult eps_nash_greedy(const StagePayoffOracle& oracle, double eps,
                             const DeterministicProfile& start);

// Enumerates every deterministic profile (product of action counts must be
// <= 1e5) and returns all exact pure Nash equilibria (gap <= 1e-12), sorted
// by gap.
std::vector<std::pair<DeterministicProfile, double>> brute_force_pure_nash(
    const StagePayoffOracle& oracle);

// Exact max_i Delta_i of a deterministic profile, by full best-response scan.
double profile_gap(const StagePayoffOracle& oracle, const DeterministicProfile& profile);

}  // namespace congestion
