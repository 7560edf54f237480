#include "congestion/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace congestion {

namespace {

// Best response of `player` with the rest of `profile` fixed.
// Returns (action index, payoff at that action), ties to the lowest index.
std::pair<int, double> best_response_scan(const StagePayoffOracle& oracle,
                                          DeterministicProfile& profile, int player) {
  const int original = profile[player];
  int best = 0;
  double best_value;

  if (oracle.congestion_structured()) {
    // Opponent counts per facility, then score(a_i) = sum_f g(f, n_-i^f + 1).
    std::vector<int> opp_counts(static_cast<std::size_t>(oracle.num_facilities), 0);
    for (int j = 0; j < oracle.num_players; ++j) {
      if (j == player) continue;
      for (int f : oracle.facility_members(j, profile[j])) ++opp_counts[static_cast<std::size_t>(f)];
    }
    best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < oracle.action_counts[static_cast<std::size_t>(player)]; ++a) {
      double score = 0.0;
      for (int f : oracle.facility_members(player, static_cast<int>(a)))
        score += oracle.facility_value(f, opp_counts[static_cast<std::size_t>(f)] + 1);
      if (score > best_value) {
        best_value = score;
        best = static_cast<int>(a);
      }
    }
  } else {
    best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < oracle.action_counts[static_cast<std::size_t>(player)]; ++a) {
      profile[player] = static_cast<int>(a);
      const double score = oracle.payoff(player, profile);
      if (score > best_value) {
        best_value = score;
        best = static_cast<int>(a);
      }
    }
    profile[player] = original;
  }
  return {best, best_value};
}

}  // namespace

double profile_gap(const StagePayoffOracle& oracle, const DeterministicProfile& profile) {
  DeterministicProfile work = profile;
  double gap = 0.0;
  for (int i = 0; i < oracle.num_players; ++i) {
    const double br = best_response_scan(oracle, work, i).second;
    gap = std::max(gap, br - oracle.payoff(i, work));
  }
  return gap;
}

GreedyResult eps_nash_greedy(const StagePayoffOracle& oracle, double eps,
                             const DeterministicProfile& start) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be > 0");
  const int m = oracle.num_players;
  const long long cap =
      static_cast<long long>(std::ceil(static_cast<double>(m) * oracle.r_max / eps));

  DeterministicProfile profile = start;
  DeterministicProfile best_seen = start;
  double best_seen_gap = std::numeric_limits<double>::infinity();

  GreedyResult result;
  for (long long round = 1; round <= cap; ++round) {
    int switch_player = -1;
    int switch_action = -1;
    double max_delta = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const auto [action, value] = best_response_scan(oracle, profile, i);
      const double delta = value - oracle.payoff(i, profile);
      if (delta > max_delta) {  // ties to the lowest player index
        max_delta = delta;
        switch_player = i;
        switch_action = action;
      }
    }
    result.rounds_used = static_cast<int>(round);
    if (max_delta < best_seen_gap) {
      best_seen_gap = max_delta;
      best_seen = profile;
    }
    if (max_delta <= eps) {
      result.profile = profile;
      result.achieved_gap = std::max(max_delta, 0.0);
      result.converged = true;
      return result;
    }
    profile[switch_player] = switch_action;
  }
  result.profile = best_seen;
  result.achieved_gap = std::max(best_seen_gap, 0.0);
  result.converged = false;
  return result;
}

std::vector<std::pair<DeterministicProfile, double>> brute_force_pure_nash(
    const StagePayoffOracle& oracle) {
  long long total = 1;
  for (std::size_t n : oracle.action_counts) {
    total *= static_cast<long long>(n);
    if (total > 100000)
      throw std::invalid_argument("joint action space exceeds the 1e5 enumeration guard");
  }

  std::vector<std::pair<DeterministicProfile, double>> equilibria;
  DeterministicProfile profile(static_cast<std::size_t>(oracle.num_players), 0);
  for (long long idx = 0; idx < total; ++idx) {
    long long rest = idx;
    for (int i = 0; i < oracle.num_players; ++i) {
      profile[i] = static_cast<int>(rest % static_cast<long long>(oracle.action_counts[i]));
      rest /= static_cast<long long>(oracle.action_counts[i]);
    }
    const double gap = profile_gap(oracle, profile);
    if (gap <= 1e-12) equilibria.emplace_back(profile, gap);
  }
  std::sort(equilibria.begin(), equilibria.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  return equilibria;
}

}  // namespace congestion
