#include "congestion/nash_ucb.hpp"

#include <cmath>

namespace congestion {

std::vector<int> feature_slots(const CongestionGame& game, const JointAction& a, int player) {
  const CountProfile counts = game.count_profile(a);
  const int m = game.num_players();
  std::vector<int> slots;
  for (int f : game.action(player, a[player]))
    slots.push_back(m * f + counts[static_cast<std::size_t>(f)] - 1);
  return slots;
}

RidgeState::RidgeState(int dim)
    : v_(Eigen::MatrixXd::Identity(dim, dim)),
      v_inv_(Eigen::MatrixXd::Identity(dim, dim)),
      response_(Eigen::VectorXd::Zero(dim)),
      theta_(Eigen::VectorXd::Zero(dim)) {}

void RidgeState::update(const std::vector<int>& slots, double reward) {
  if (!slots.empty()) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(v_.rows());
    for (int s : slots) u(s) = 1.0;
    const Eigen::VectorXd w = v_inv_ * u;
    const double denom = 1.0 + u.dot(w);
    log_det_ += std::log(denom);
    v_ += u * u.transpose();
    v_inv_ -= (w * w.transpose()) / denom;
    response_ += reward * u;
  }
  theta_ = v_inv_ * response_;
  if (++updates_since_refresh_ >= 1000) refresh();
}

void RidgeState::refresh() {
  v_inv_ = v_.ldlt().solve(Eigen::MatrixXd::Identity(v_.rows(), v_.cols()));
  theta_ = v_inv_ * response_;
  updates_since_refresh_ = 0;
}

double RidgeState::inv_quadratic(const std::vector<int>& slots) const {
  double q = 0.0;
  for (int r : slots)
    for (int c : slots) q += v_inv_(r, c);
  return q;
}

double RidgeState::theta_dot(const std::vector<int>& slots) const {
  double dot = 0.0;
  for (int s : slots) dot += theta_(s);
  return dot;
}

double ucb_iota(int num_players, long long episodes, double delta) {
  return 2.0 * std::log(4.0 * static_cast<double>(num_players + 1) *
                        static_cast<double>(episodes) / delta);
}

double ucb_sqrt_beta(int dim, int num_players, int num_facilities, long long k, double iota) {
  const double d = static_cast<double>(dim);
  const double load = static_cast<double>(num_players) * static_cast<double>(k) *
                      static_cast<double>(num_facilities) / d;
  return std::sqrt(d) +
         std::sqrt(static_cast<double>(num_facilities) * d * std::log(1.0 + load) +
                   static_cast<double>(num_facilities) * iota);
}

StagePayoffOracle semi_bandit_oracle(const CongestionGame& game, const FacilityCounter& counter,
                                     double iota) {
  StagePayoffOracle oracle;
  oracle.num_players = game.num_players();
  oracle.num_facilities = game.num_facilities();
  oracle.action_counts = game.action_counts();
  // Max possible optimistic payoff: F facilities each worth at most 1 + sqrt(iota).
  oracle.r_max = static_cast<double>(game.num_facilities()) * (1.0 + std::sqrt(iota));
  oracle.facility_value = [&game, &counter, iota](int f, int n) {
    const long long visits = std::max<long long>(counter.visits(f, n), 1);
    return counter.mean(f, n) + std::sqrt(iota / static_cast<double>(visits));
  };
  oracle.facility_members = [&game](int player, int action) -> const std::vector<int>& {
    return game.action(player, action);
  };
  oracle.payoff = [&game, &counter, iota](int player, const DeterministicProfile& profile) {
    const CountProfile counts = game.count_profile(profile);
    double q = 0.0;
    for (int f : game.action(player, profile[player])) {
      const int n = counts[static_cast<std::size_t>(f)];
      const long long visits = std::max<long long>(counter.visits(f, n), 1);
      q += counter.mean(f, n) + std::sqrt(iota / static_cast<double>(visits));
    }
    return q;
  };
  return oracle;
}

StagePayoffOracle bandit_oracle(const CongestionGame& game, const RidgeState& ridge,
                                double sqrt_beta) {
  StagePayoffOracle oracle;
  oracle.num_players = game.num_players();
  oracle.num_facilities = game.num_facilities();
  oracle.action_counts = game.action_counts();
  const double df = static_cast<double>(game.num_players() * game.num_facilities());
  oracle.r_max =
      std::sqrt(static_cast<double>(game.num_facilities())) * (std::sqrt(df) + sqrt_beta);
  oracle.payoff = [&game, &ridge, sqrt_beta](int player, const DeterministicProfile& profile) {
    double bonus_sq = 0.0;
    for (int j = 0; j < game.num_players(); ++j)
      bonus_sq = std::max(bonus_sq, ridge.inv_quadratic(feature_slots(game, profile, j)));
    return ridge.theta_dot(feature_slots(game, profile, player)) +
           std::sqrt(bonus_sq) * sqrt_beta;
  };
  return oracle;
}

RegretTrace run_nash_ucb(const CongestionGame& game, const UcbConfig& cfg, std::uint64_t seed,
                         UcbDiagnostics* diagnostics, const EpisodeObserver& observer) {
  const int m = game.num_players();
  const int F = game.num_facilities();
  const long long K = cfg.episodes;
  const double eps = cfg.eps_stage > 0.0 ? cfg.eps_stage : 1.0 / std::max<long long>(K, 1);
  const double iota =
      cfg.iota_override ? *cfg.iota_override : ucb_iota(m, std::max<long long>(K, 1), cfg.delta);

  FacilityCounter counter(F, m);
  RidgeState ridge(m * F);
  Rng rng(seed);

  RegretTrace trace;
  trace.seed = seed;
  DeterministicProfile profile(static_cast<std::size_t>(m), 0);  // warm start carrier

  for (long long k = 1; k <= K; ++k) {
    StagePayoffOracle oracle =
        cfg.feedback == Feedback::SemiBandit
            ? semi_bandit_oracle(game, counter, iota)
            : bandit_oracle(game, ridge, ucb_sqrt_beta(m * F, m, F, k, iota));
    const GreedyResult stage = eps_nash_greedy(oracle, eps, profile);
    profile = stage.profile;

    if (observer)
      observer(k, profile,
               [&oracle](int player, const JointAction& a) { return oracle.payoff(player, a); });
    if (diagnostics && cfg.feedback == Feedback::Bandit) {
      double worst = 0.0;
      for (int i = 0; i < m; ++i)
        worst = std::max(worst, ridge.inv_quadratic(feature_slots(game, profile, i)));
      diagnostics->elliptical_terms.push_back(std::min(worst, 1.0));
      diagnostics->log_det.push_back(ridge.log_det());
    }

    // pi^k is deterministic, so a^k = profile.
    Rng round_rng = rng.substream(static_cast<std::uint64_t>(k), 1, 0);
    const auto [observations, realized] = game.sample_round(profile, round_rng);

    if (cfg.feedback == Feedback::SemiBandit) {
      const CountProfile counts = game.count_profile(profile);
      for (int f = 0; f < F; ++f)
        if (counts[static_cast<std::size_t>(f)] >= 1)
          counter.record(f, counts[static_cast<std::size_t>(f)], realized[static_cast<std::size_t>(f)]);
    } else {
      for (int i = 0; i < m; ++i)
        ridge.update(feature_slots(game, profile, i), observations[static_cast<std::size_t>(i)].total);
    }

    TraceRow row;
    row.episode = k;
    row.gap = game.nash_gap(ProductPolicy::deterministic(profile, game.action_counts()));
    row.cum_regret = (trace.rows.empty() ? 0.0 : trace.rows.back().cum_regret) + row.gap;
    for (int i = 0; i < m; ++i)
      row.player_rewards.push_back(observations[static_cast<std::size_t>(i)].total);
    row.stage_rounds = stage.rounds_used;
    row.converged = stage.converged;
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

}  // namespace congestion
