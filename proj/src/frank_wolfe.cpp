#include "congestion/frank_wolfe.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace congestion {

FwConfig FwConfig::resolved(int num_players, int num_facilities) const {
  FwConfig out = *this;
  const double m = static_cast<double>(num_players);
  const double F = static_cast<double>(num_facilities);
  const double K = static_cast<double>(episodes);
  if (schedule == FwSchedule::TheoremDefault) {
    const double scale = feedback == Feedback::Bandit ? F : std::sqrt(F);
    if (K < 2.0 * scale / m)
      throw std::invalid_argument("TheoremDefault requires K >= 2F/m (bandit) or 2*sqrt(F)/m (semi)");
    out.nu = scale / (m * std::sqrt(K));
    out.gamma = scale / (m * K);
    out.rounds_per_episode = episodes * episodes;
  }
  if (out.gamma < 0.0 || out.gamma > 1.0 || out.nu < 0.0 || out.nu > 1.0)
    throw std::invalid_argument("gamma and nu must lie in [0,1]");
  if (out.rounds_per_episode < 1) throw std::invalid_argument("tau must be >= 1");
  return out;
}

PlayerLearner::PlayerLearner(std::vector<Action> action_set, int num_facilities,
                             Feedback feedback, double design_tol)
    : actions_(std::move(action_set)), num_facilities_(num_facilities), feedback_(feedback) {
  features_.reserve(actions_.size());
  for (const Action& a : actions_) {
    std::vector<double> phi(static_cast<std::size_t>(num_facilities_), 0.0);
    for (int f : a) phi[static_cast<std::size_t>(f)] = 1.0;
    features_.push_back(std::move(phi));
  }
  policy_.assign(actions_.size(), 1.0 / static_cast<double>(actions_.size()));
  if (feedback_ == Feedback::Bandit)
    exploration_ = g_optimal(features_, design_tol).weights;
  else
    exploration_ = semi_bandit_exploration(actions_, num_facilities_);
}

int PlayerLearner::sample_action(Rng& rng) const { return rng.categorical(policy_); }

void PlayerLearner::observe_bandit(int action, double total_reward) {
  bandit_buffer_.emplace_back(action, total_reward);
}

void PlayerLearner::observe_semi(int action,
                                 const std::vector<std::pair<int, double>>& facility_rewards) {
  semi_buffer_.emplace_back(action, facility_rewards);
}

void PlayerLearner::refresh_covariance() {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(num_facilities_, num_facilities_);
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    Eigen::Map<const Eigen::VectorXd> phi(features_[a].data(), num_facilities_);
    sigma += policy_[a] * phi * phi.transpose();
  }
  // Pseudo-inverse on the span; outside-span components are projected away.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  Eigen::VectorXd inv_vals = eig.eigenvalues();
  for (Eigen::Index j = 0; j < inv_vals.size(); ++j)
    inv_vals(j) = inv_vals(j) > 1e-12 ? 1.0 / inv_vals(j) : 0.0;
  covariance_pinv_ =
      eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<double> PlayerLearner::gradient_estimate_bandit(double gamma) {
  const double tau = static_cast<double>(bandit_buffer_.size());
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(num_facilities_);
  for (const auto& [action, reward] : bandit_buffer_) {
    Eigen::Map<const Eigen::VectorXd> phi(features_[static_cast<std::size_t>(action)].data(),
                                          num_facilities_);
    weighted += (covariance_pinv_ * phi) * reward;
  }
  weighted /= tau;
  (void)gamma;

#ifndef NDEBUG
  // Per-sample magnitude bound F^2/gamma.
  if (gamma > 0.0) {
    const double bound = static_cast<double>(num_facilities_) *
                             static_cast<double>(num_facilities_) / gamma +
                         1e-9;
    for (const auto& [action, reward] : bandit_buffer_) {
      Eigen::Map<const Eigen::VectorXd> phi_t(features_[static_cast<std::size_t>(action)].data(),
                                              num_facilities_);
      for (const auto& phi_a : features_) {
        Eigen::Map<const Eigen::VectorXd> phi(phi_a.data(), num_facilities_);
        assert(std::abs(phi.dot(covariance_pinv_ * phi_t) * reward) <= bound);
      }
    }
  }
#endif
  bandit_buffer_.clear();

  std::vector<double> gradient(actions_.size(), 0.0);
  for (std::size_t a = 0; a < actions_.size(); ++a) {
    Eigen::Map<const Eigen::VectorXd> phi(features_[a].data(), num_facilities_);
    gradient[a] = phi.dot(weighted);
  }
  return gradient;
}

double PlayerLearner::inclusion_probability(int facility) const {
  double p = 0.0;
  for (std::size_t a = 0; a < actions_.size(); ++a)
    if (features_[a][static_cast<std::size_t>(facility)] > 0.0) p += policy_[a];
  return p;
}

std::vector<double> PlayerLearner::gradient_estimate_semi(double gamma) {
  const double tau = static_cast<double>(semi_buffer_.size());
  std::vector<double> theta(static_cast<std::size_t>(num_facilities_), 0.0);
  std::vector<double> inclusion(static_cast<std::size_t>(num_facilities_), 0.0);
  for (int f = 0; f < num_facilities_; ++f)
    inclusion[static_cast<std::size_t>(f)] = inclusion_probability(f);

  for (const auto& [action, rewards] : semi_buffer_) {
    (void)action;
    for (const auto& [f, r] : rewards) {
      const double p = inclusion[static_cast<std::size_t>(f)];
      assert(p > 0.0 && "sampled facility must have positive inclusion probability");
      const double term = r / p;
#ifndef NDEBUG
      if (gamma > 0.0)
        assert(std::abs(term) <= 2.0 * static_cast<double>(num_facilities_) / gamma + 1e-9);
#endif
      theta[static_cast<std::size_t>(f)] += term;
    }
  }
  (void)gamma;
  for (double& t : theta) t /= tau;
  semi_buffer_.clear();

  std::vector<double> gradient(actions_.size(), 0.0);
  for (std::size_t a = 0; a < actions_.size(); ++a)
    for (int f : actions_[a]) gradient[a] += theta[static_cast<std::size_t>(f)];
  return gradient;
}

void PlayerLearner::fw_step(const std::vector<double>& gradient, double gamma, double nu) {
  std::size_t best = 0;
  for (std::size_t a = 1; a < gradient.size(); ++a)
    if (gradient[a] > gradient[best]) best = a;  // ties to the lowest index
  for (std::size_t a = 0; a < policy_.size(); ++a) {
    const double vertex = a == best ? 1.0 : 0.0;
    policy_[a] = (1.0 - gamma) * (nu * vertex + (1.0 - nu) * policy_[a]) + gamma * exploration_[a];
  }
}

double fw_gap(const CongestionGame& game, const ProductPolicy& pi) {
  game.validate_policy(pi);
  double gap = 0.0;
  for (int i = 0; i < game.num_players(); ++i) {
    const std::vector<double> theta = game.facility_load_vector(pi, i);
    double best = -std::numeric_limits<double>::infinity();
    double current = 0.0;
    for (std::size_t a = 0; a < game.num_actions(i); ++a) {
      double dot = 0.0;
      for (int f : game.action(i, static_cast<int>(a))) dot += theta[static_cast<std::size_t>(f)];
      best = std::max(best, dot);
      current += pi.probs[i][a] * dot;
    }
    gap += best - current;
  }
  return gap;
}

RegretTrace run_frank_wolfe(const CongestionGame& game, const FwConfig& raw_cfg,
                            std::uint64_t seed, const FwObserver& observer) {
  if (raw_cfg.feedback != game.feedback())
    throw std::invalid_argument("config feedback mode must match the game");
  const FwConfig cfg = raw_cfg.resolved(game.num_players(), game.num_facilities());
  const int m = game.num_players();
  const long long tau = cfg.rounds_per_episode;

  std::vector<PlayerLearner> learners;
  learners.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    learners.emplace_back(game.actions(i), game.num_facilities(), cfg.feedback, cfg.design_tol);

  Rng rng(seed);
  RegretTrace trace;
  trace.seed = seed;
  trace.regret_multiplier = static_cast<double>(tau);

  JointAction joint(static_cast<std::size_t>(m), 0);
  for (long long k = 1; k <= cfg.episodes; ++k) {
    ProductPolicy pi;
    for (const PlayerLearner& learner : learners) pi.probs.push_back(learner.policy());
    if (observer) observer(k, pi);
    const double gap = game.nash_gap(pi);

    for (PlayerLearner& learner : learners)
      if (cfg.feedback == Feedback::Bandit) learner.refresh_covariance();

    std::vector<double> episode_rewards(static_cast<std::size_t>(m), 0.0);
    for (long long t = 1; t <= tau; ++t) {
      for (int i = 0; i < m; ++i) {
        Rng player_rng = rng.substream(static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(i) + 1);
        joint[static_cast<std::size_t>(i)] =
            learners[static_cast<std::size_t>(i)].sample_action(player_rng);
      }
      Rng facility_rng = rng.substream(static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(t), 0);
      const auto [observations, realized] = game.sample_round(joint, facility_rng);
      for (int i = 0; i < m; ++i) {
        const Observation& obs = observations[static_cast<std::size_t>(i)];
        episode_rewards[static_cast<std::size_t>(i)] += obs.total;
        if (cfg.feedback == Feedback::Bandit)
          learners[static_cast<std::size_t>(i)].observe_bandit(joint[static_cast<std::size_t>(i)],
                                                               obs.total);
        else
          learners[static_cast<std::size_t>(i)].observe_semi(joint[static_cast<std::size_t>(i)],
                                                             obs.facility_rewards);
      }
    }

    for (PlayerLearner& learner : learners) {
      const std::vector<double> gradient = cfg.feedback == Feedback::Bandit
                                               ? learner.gradient_estimate_bandit(cfg.gamma)
                                               : learner.gradient_estimate_semi(cfg.gamma);
      learner.fw_step(gradient, cfg.gamma, cfg.nu);
    }

    TraceRow row;
    row.episode = k;
    row.gap = gap;
    row.cum_regret = (trace.rows.empty() ? 0.0 : trace.rows.back().cum_regret) +
                     gap * static_cast<double>(tau);
    row.player_rewards = std::move(episode_rewards);
    row.stage_rounds = 0;
    row.converged = true;
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace congestion
