#pragma once

#include <Eigen/Dense>
#include <optional>

#include "congestion/design.hpp"
#include "congestion/game.hpp"
#include "congestion/trace.hpp"

namespace congestion {

enum class FwSchedule { Manual, TheoremDefault };

struct FwConfig {
  long long episodes = 0;  // K
  long long rounds_per_episode = 0;  // tau
  double gamma = 0.0;      // exploration mixture weight
  double nu = 0.0;         // FW step weight
  Feedback feedback = Feedback::Bandit;
  FwSchedule schedule = FwSchedule::Manual;
  double design_tol = 1e-3;

  // Resolves TheoremDefault (nu = F/(m sqrt K), gamma = F/(mK), tau = K^2 for
  // bandit; sqrt F in place of F for semi-bandit) and checks the K floor
  // (K >= 2F/m bandit, K >= 2 sqrt(F)/m semi-bandit).
  FwConfig resolved(int num_players, int num_facilities) const;
};

// One player's decentralized learner. Holds only her own action set, policy,
// exploration distribution and observation buffer: no access path to the
// game's reward table or to other players' state.
class PlayerLearner {
 public:
  PlayerLearner(std::vector<Action> action_set, int num_facilities, Feedback feedback,
                double design_tol);

  const std::vector<double>& policy() const { return policy_; }
  const std::vector<double>& exploration() const { return exploration_; }
  std::size_t num_actions() const { return actions_.size(); }

  int sample_action(Rng& rng) const;
  void observe_bandit(int action, double total_reward);
  void observe_semi(int action, const std::vector<std::pair<int, double>>& facility_rewards);

  // Eq.-(5)-style covariance-weighted estimator from the episode buffer;
  // clears the buffer. Debug builds assert the F^2/gamma per-sample bound.
  std::vector<double> gradient_estimate_bandit(double gamma);
  // IPS estimator from per-facility rewards; clears the buffer.
  std::vector<double> gradient_estimate_semi(double gamma);

  // pi <- (1-gamma)(nu * argmax-vertex + (1-nu) * pi) + gamma * rho.
  void fw_step(const std::vector<double>& gradient, double gamma, double nu);

  // Exact covariance Sigma = E_{a~pi}[phi phi^T] and its span pseudo-inverse;
  // recomputed once per episode.
  void refresh_covariance();

 private:
  double inclusion_probability(int facility) const;

  std::vector<Action> actions_;
  int num_facilities_;
  Feedback feedback_;
  std::vector<std::vector<double>> features_;  // dense phi(a), dimension F
  std::vector<double> policy_;
  std::vector<double> exploration_;
  Eigen::MatrixXd covariance_pinv_;
  std::vector<std::pair<int, double>> bandit_buffer_;  // (action, total reward)
  std::vector<std::pair<int, std::vector<std::pair<int, double>>>> semi_buffer_;
};

// Exact Frank-Wolfe gap G(pi) = sum_i (max_a grad_i(a) - <pi_i, grad_i>),
// grad from the facility-load oracle.
double fw_gap(const CongestionGame& game, const ProductPolicy& pi);

using FwObserver = std::function<void(long long episode, const ProductPolicy& pi)>;

RegretTrace run_frank_wolfe(const CongestionGame& game, const FwConfig& cfg, std::uint64_t seed,
                            const FwObserver& observer = {});

}  // namespace congestion
