#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "congestion/nash_ucb.hpp"
#include "congestion/trace.hpp"

using namespace congestion;

namespace {

// m=2, F=2; player 0 can stay out, take facility 0, or take both;
// player 1 can stay out or take facility 0.
CongestionGame two_facility_game(Feedback feedback = Feedback::SemiBandit) {
  return CongestionGame(2, 2, {{{}, {0}, {0, 1}}, {{}, {0}}},
                        {{0.9, 0.3}, {0.6, 0.2}}, {}, feedback);
}

}  // namespace

TEST_CASE("feature slots encode (facility, count) pairs") {
  const CongestionGame g = two_facility_game();
  // Both players on facility 0; player 0 also on facility 1.
  const JointAction a{2, 1};
  CHECK(feature_slots(g, a, 0) == std::vector<int>{1, 2});  // f0 count 2, f1 count 1
  CHECK(feature_slots(g, a, 1) == std::vector<int>{1});
  CHECK(feature_slots(g, {0, 0}, 0).empty());
  // Player 0 alone on facility 0 -> slot 0.
  CHECK(feature_slots(g, {1, 0}, 0) == std::vector<int>{0});
}

TEST_CASE("confidence scale formulas") {
  CHECK(ucb_iota(2, 100, 0.01) ==
        doctest::Approx(2.0 * std::log(4.0 * 3.0 * 100.0 / 0.01)).epsilon(1e-12));
  const double d = 4.0;
  CHECK(ucb_sqrt_beta(4, 2, 2, 10, 1.5) ==
        doctest::Approx(std::sqrt(d) + std::sqrt(2.0 * d * std::log(1.0 + 2.0 * 10.0 * 2.0 / d) +
                                                 2.0 * 1.5))
            .epsilon(1e-12));
}

TEST_CASE("semi-bandit oracle before any data pays the bonus per facility") {
  const CongestionGame g = two_facility_game();
  FacilityCounter counter(2, 2);
  const double iota = 2.0;
  const StagePayoffOracle oracle = semi_bandit_oracle(g, counter, iota);

  CHECK(oracle.payoff(0, {0, 0}) == 0.0);
  CHECK(oracle.payoff(0, {1, 0}) == doctest::Approx(std::sqrt(iota)).epsilon(1e-12));
  CHECK(oracle.payoff(0, {2, 0}) == doctest::Approx(2.0 * std::sqrt(iota)).epsilon(1e-12));

  // One observed sample moves the mean and shrinks nothing else.
  counter.record(0, 1, 0.7);
  const StagePayoffOracle updated = semi_bandit_oracle(g, counter, iota);
  CHECK(updated.payoff(0, {1, 0}) == doctest::Approx(0.7 + std::sqrt(iota)).epsilon(1e-12));
  CHECK(updated.payoff(1, {0, 1}) == doctest::Approx(0.7 + std::sqrt(iota)).epsilon(1e-12));
  CHECK(updated.payoff(0, {1, 1}) == doctest::Approx(std::sqrt(iota)).epsilon(1e-12));  // count 2 unseen
}

TEST_CASE("bandit oracle bonus uses the worst player's elliptical norm") {
  const CongestionGame g = two_facility_game(Feedback::Bandit);
  RidgeState ridge(4);
  const double sqrt_beta = 3.0;
  const StagePayoffOracle oracle = bandit_oracle(g, ridge, sqrt_beta);

  // V = I, theta = 0: payoff is sqrt(|slots|) of the widest player times sqrt(beta).
  CHECK(oracle.payoff(0, {2, 0}) == doctest::Approx(std::sqrt(2.0) * sqrt_beta).epsilon(1e-12));
  // Both players share one slot apiece, so the widest norm is 1.
  CHECK(oracle.payoff(1, {1, 1}) == doctest::Approx(sqrt_beta).epsilon(1e-12));
  CHECK(oracle.payoff(0, {0, 0}) == 0.0);

  // A single unit-slot observation: theta_s = r / 2 under the ridge prior.
  ridge.update({0}, 1.0);
  CHECK(ridge.theta_dot({0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ridge.inv_quadratic({0}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sherman-morrison inverse tracks a direct solve") {
  const int d = 6;
  RidgeState ridge(d);
  Rng rng(13);
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
  for (int t = 0; t < 2500; ++t) {  // crosses the periodic refresh
    std::vector<int> slots;
    for (int s = 0; s < d; ++s)
      if (rng.bernoulli(0.4)) slots.push_back(s);
    const double reward = rng.uniform();
    ridge.update(slots, reward);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
    for (int s : slots) u(s) = 1.0;
    v += u * u.transpose();
    b += reward * u;
  }
  const Eigen::VectorXd direct = v.ldlt().solve(b);
  for (int s = 0; s < d; ++s) CHECK(std::abs(ridge.theta()(s) - direct(s)) <= 1e-6);
  CHECK(ridge.log_det() ==
        doctest::Approx(std::log(v.determinant())).epsilon(1e-6));
  const std::vector<int> probe{0, 2, 5};
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  for (int s : probe) u(s) = 1.0;
  CHECK(ridge.inv_quadratic(probe) ==
        doctest::Approx(u.dot(v.ldlt().solve(u))).epsilon(1e-9));
}

TEST_CASE("exact means with zero bonus solve the stage game exactly") {
  const CongestionGame g = two_facility_game();
  FacilityCounter counter(2, 2);
  for (int f = 0; f < 2; ++f)
    for (int n = 1; n <= 2; ++n) counter.record(f, n, g.mean_reward(f, n));
  const StagePayoffOracle oracle = semi_bandit_oracle(g, counter, 0.0);
  const GreedyResult stage = eps_nash_greedy(oracle, 1e-9, {0, 0});
  CHECK(stage.converged);
  CHECK(g.nash_gap(ProductPolicy::deterministic(stage.profile, g.action_counts())) == 0.0);
}

TEST_CASE("zero episodes yield an empty trace") {
  const CongestionGame g = two_facility_game();
  UcbConfig cfg;
  cfg.episodes = 0;
  CHECK(run_nash_ucb(g, cfg, 1).rows.empty());
}

TEST_CASE("single player finds her best action quickly") {
  const CongestionGame g(1, 2, {{{}, {0}, {1}, {0, 1}}}, {{0.8}, {0.3}});
  UcbConfig cfg;
  cfg.episodes = 500;
  std::vector<double> best_gaps;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const RegretTrace trace = run_nash_ucb(g, cfg, seed);
    best_gaps.push_back(trace.best_iterate().first);
  }
  std::sort(best_gaps.begin(), best_gaps.end());
  CHECK(best_gaps[4] <= 0.05);
}

TEST_CASE("decisions come from the optimistic oracle the observer sees") {
  const CongestionGame g = two_facility_game();
  UcbConfig cfg;
  cfg.episodes = 20;
  bool checked = false;
  run_nash_ucb(g, cfg, 7, nullptr,
               [&](long long, const DeterministicProfile& profile,
                   const std::function<double(int, const JointAction&)>& qbar) {
                 // No unilateral deviation beats the greedy stage profile by
                 // more than the stage tolerance (eps = 1/K here).
                 for (int i = 0; i < g.num_players(); ++i) {
                   JointAction dev = profile;
                   for (std::size_t a = 0; a < g.num_actions(i); ++a) {
                     dev[static_cast<std::size_t>(i)] = static_cast<int>(a);
                     CHECK(qbar(i, dev) <= qbar(i, profile) + 1.0 / 20.0 + 1e-9);
                   }
                 }
                 checked = true;
               });
  CHECK(checked);
}

TEST_CASE("same seed reproduces the trace byte for byte") {
  for (Feedback fb : {Feedback::SemiBandit, Feedback::Bandit}) {
    const CongestionGame g = two_facility_game(fb);
    UcbConfig cfg;
    cfg.episodes = 50;
    cfg.feedback = fb;
    const RegretTrace a = run_nash_ucb(g, cfg, 99);
    const RegretTrace b = run_nash_ucb(g, cfg, 99);
    CHECK(trace_to_csv(a, g.num_players()) == trace_to_csv(b, g.num_players()));
    const RegretTrace c = run_nash_ucb(g, cfg, 100);
    CHECK(trace_to_csv(a, g.num_players()) != trace_to_csv(c, g.num_players()));
  }
}
