#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "congestion/equilibrium.hpp"
#include "congestion/game.hpp"
#include "congestion/trace.hpp"

namespace congestion {

// Indices of the nonzero entries of A_i(a): slot m*f + (n^f(a) - 1) for each
// f in a_i. The full vector has dimension m*F.
std::vector<int> feature_slots(const CongestionGame& game, const JointAction& a, int player);

// Per-(facility, count) visit counts and reward sums for semi-bandit runs.
class FacilityCounter {
 public:
  FacilityCounter(int num_facilities, int num_players)
      : counts_(static_cast<std::size_t>(num_facilities),
                std::vector<long long>(static_cast<std::size_t>(num_players) + 1, 0)),
        sums_(static_cast<std::size_t>(num_facilities),
              std::vector<double>(static_cast<std::size_t>(num_players) + 1, 0.0)) {}

  void record(int facility, int count, double reward) {
    ++counts_[facility][count];
    sums_[facility][count] += reward;
  }
  long long visits(int facility, int count) const { return counts_[facility][count]; }
  double mean(int facility, int count) const {
    const long long n = counts_[facility][count];
    return n == 0 ? 0.0 : sums_[facility][count] / static_cast<double>(n);
  }

 private:
  std::vector<std::vector<long long>> counts_;
  std::vector<std::vector<double>> sums_;
};

// Ridge regression over the mF-dimensional facility-count features, with
// rank-1 Sherman-Morrison updates of the inverse and a periodic full
// refactorization.
class RidgeState {
 public:
  explicit RidgeState(int dim);

  void update(const std::vector<int>& slots, double reward);
  void refresh();  // full re-factorization of the inverse

  int dim() const { return static_cast<int>(v_.rows()); }
  const Eigen::VectorXd& theta() const { return theta_; }
  double log_det() const { return log_det_; }
  // ||A||^2_{V^{-1}} for a sparse 0/1 vector given by its slots.
  double inv_quadratic(const std::vector<int>& slots) const;
  double theta_dot(const std::vector<int>& slots) const;

 private:
  Eigen::MatrixXd v_;
  Eigen::MatrixXd v_inv_;
  Eigen::VectorXd response_;
  Eigen::VectorXd theta_;
  double log_det_ = 0.0;
  long long updates_since_refresh_ = 0;
};

struct UcbConfig {
  long long episodes = 0;        // K
  double delta = 0.01;           // failure probability
  double eps_stage = 0.0;        // 0 means the 1/K default
  Feedback feedback = Feedback::SemiBandit;
  std::optional<double> iota_override;  // tests only
};

// iota-tilde = 2 log(4(m+1)K / delta).
double ucb_iota(int num_players, long long episodes, double delta);
// sqrt(beta_k) = sqrt(d) + sqrt(F d log(1 + mkF/d) + F iota).
double ucb_sqrt_beta(int dim, int num_players, int num_facilities, long long k, double iota);

// Optimistic stage-game evaluators. The semi-bandit one is congestion
// structured (facility-additive); the bandit one carries the shared
// max-over-players bonus.
StagePayoffOracle semi_bandit_oracle(const CongestionGame& game, const FacilityCounter& counter,
                                     double iota);
StagePayoffOracle bandit_oracle(const CongestionGame& game, const RidgeState& ridge,
                                double sqrt_beta);

struct UcbDiagnostics {
  // min{ max_i ||A_i(a^k)||^2_{(V^k)^{-1}}, 1 } per episode (bandit mode).
  std::vector<double> elliptical_terms;
  std::vector<double> log_det;  // log det(V^k) per episode
};

using EpisodeObserver =
    std::function<void(long long episode, const DeterministicProfile& profile,
                       const std::function<double(int, const JointAction&)>& qbar)>;

RegretTrace run_nash_ucb(const CongestionGame& game, const UcbConfig& cfg, std::uint64_t seed,
                         UcbDiagnostics* diagnostics = nullptr,
                         const EpisodeObserver& observer = {});

}  // namespace congestion
