#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "congestion/rng.hpp"

namespace congestion {

enum class NoiseKind { Bernoulli, TruncatedGaussian };
enum class Feedback { SemiBandit, Bandit };

struct NoiseModel {
  NoiseKind kind = NoiseKind::Bernoulli;
  double sigma = 0.1;  // TruncatedGaussian only
};

// An action is an ordered, duplicate-free list of facility ids.
using Action = std::vector<int>;
// One action index per player.
using JointAction = std::vector<int>;
// n^f for each facility.
using CountProfile = std::vector<int>;

// Per-player probability vector over that player's action list.
struct ProductPolicy {
  std::vector<std::vector<double>> probs;

  static ProductPolicy uniform(const std::vector<std::size_t>& action_counts);
  static ProductPolicy deterministic(const JointAction& a,
                                     const std::vector<std::size_t>& action_counts);
};

struct Observation {
  // Semi-bandit: (facility, realized reward) for each f in a_i.
  std::vector<std::pair<int, double>> facility_rewards;
  // Bandit: sum over a_i of realized facility rewards. Filled in both modes.
  double total = 0.0;
};

class CongestionGame {
 public:
  CongestionGame(int num_players, int num_facilities,
                 std::vector<std::vector<Action>> action_sets,
                 std::vector<std::vector<double>> reward_table,
                 NoiseModel noise = {}, Feedback feedback = Feedback::SemiBandit);

  int num_players() const { return m_; }
  int num_facilities() const { return F_; }
  Feedback feedback() const { return feedback_; }
  const NoiseModel& noise() const { return noise_; }
  const std::vector<Action>& actions(int player) const { return action_sets_[player]; }
  const Action& action(int player, int index) const { return action_sets_[player][index]; }
  std::size_t num_actions(int player) const { return action_sets_[player].size(); }
  std::vector<std::size_t> action_counts() const;

  // r^f(n), n in 1..m.
  double mean_reward(int facility, int count) const { return rewards_[facility][count - 1]; }
  const std::vector<std::vector<double>>& reward_table() const { return rewards_; }

  void validate_joint_action(const JointAction& a) const;
  void validate_policy(const ProductPolicy& pi) const;

  CountProfile count_profile(const JointAction& a) const;

  // One reward draw per facility with n^f >= 1, shared by all its users.
  // Returns per-player observations and the realized facility rewards
  // (-1 for unused facilities).
  std::pair<std::vector<Observation>, std::vector<double>> sample_round(
      const JointAction& a, Rng& rng) const;

  double realized_facility_reward(int facility, int count, Rng& rng) const;

  // Phi(a) = sum_f sum_{j=1}^{n^f(a)} r^f(j).
  double potential_value(const JointAction& a) const;

  // Mean reward of player i at deterministic joint action a.
  double player_reward(int player, const JointAction& a) const;

  // [theta_i(pi)]_f = E_{a_-i ~ pi_-i}[ r^f(n^f(a_-i)) + 1) ] via
  // Poisson-binomial convolution over opponents' inclusion probabilities.
  std::vector<double> facility_load_vector(const ProductPolicy& pi, int player) const;

  // V_i^pi via the facility decomposition (no joint enumeration).
  double expected_value(const ProductPolicy& pi, int player) const;

  // argmax over the player's action list of <phi(a), theta_i(pi)>;
  // ties broken by lowest action index.
  std::pair<int, double> best_response(const ProductPolicy& pi, int player) const;

  // max_i (best-response value - V_i^pi), clipped to 0 when within -1e-9.
  double nash_gap(const ProductPolicy& pi) const;

 private:
  int m_;
  int F_;
  std::vector<std::vector<Action>> action_sets_;
  std::vector<std::vector<double>> rewards_;  // [f][n-1]
  NoiseModel noise_;
  Feedback feedback_;
};

// Distribution of the number of successes among independent Bernoulli trials
// with probabilities `p` (the standard O(n^2) convolution DP).
std::vector<double> poisson_binomial_pmf(const std::vector<double>& p);

}  // namespace congestion
