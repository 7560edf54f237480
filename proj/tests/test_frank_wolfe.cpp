#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "congestion/frank_wolfe.hpp"
#include "congestion/generators.hpp"
#include "congestion/trace.hpp"

using namespace congestion;

namespace {

CongestionGame shared_facility_game(Feedback feedback = Feedback::SemiBandit) {
  return CongestionGame(2, 1, {{{}, {0}}, {{}, {0}}}, {{1.0, 0.2}}, {}, feedback);
}

}  // namespace

TEST_CASE("fw_step mixes vertex, old policy and exploration") {
  PlayerLearner learner({{}, {0}}, 1, Feedback::SemiBandit, 1e-3);
  REQUIRE(learner.exploration() == std::vector<double>{0.5, 0.5});
  REQUIRE(learner.policy() == std::vector<double>{0.5, 0.5});

  SUBCASE("worked arithmetic") {
    learner.fw_step({0.0, 1.0}, 0.2, 0.5);
    CHECK(learner.policy()[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(learner.policy()[1] == doctest::Approx(0.7).epsilon(1e-12));
  }
  SUBCASE("full step jumps to the vertex") {
    learner.fw_step({0.0, 1.0}, 0.0, 1.0);
    CHECK(learner.policy() == std::vector<double>{0.0, 1.0});
  }
  SUBCASE("zero step leaves the policy unchanged") {
    learner.fw_step({0.0, 1.0}, 0.0, 0.0);
    CHECK(learner.policy() == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("gradient ties break to the lowest action index") {
    learner.fw_step({0.7, 0.7}, 0.0, 1.0);
    CHECK(learner.policy() == std::vector<double>{1.0, 0.0});
  }
}

TEST_CASE("policy keeps the exploration floor after a step") {
  PlayerLearner learner({{0}, {1}, {0, 1}}, 2, Feedback::SemiBandit, 1e-3);
  const double gamma = 0.3;
  learner.fw_step({0.9, 0.1, 0.5}, gamma, 0.8);
  for (std::size_t a = 0; a < 3; ++a)
    CHECK(learner.policy()[a] >= gamma * learner.exploration()[a] - 1e-12);
}

TEST_CASE("bandit gradient on a single action recovers the sample mean") {
  PlayerLearner learner({{0}}, 1, Feedback::Bandit, 1e-3);
  learner.refresh_covariance();
  learner.observe_bandit(0, 0.2);
  learner.observe_bandit(0, 0.4);
  const auto grad = learner.gradient_estimate_bandit(0.5);
  REQUIRE(grad.size() == 1);
  CHECK(grad[0] == doctest::Approx(0.3).epsilon(1e-12));

  learner.observe_bandit(0, 0.0);
  CHECK(learner.gradient_estimate_bandit(0.5)[0] == 0.0);
}

TEST_CASE("semi-bandit gradient is inverse-propensity weighted") {
  PlayerLearner learner({{}, {0}}, 1, Feedback::SemiBandit, 1e-3);
  // Uniform policy: facility 0 is included with probability 1/2.
  learner.observe_semi(1, {{0, 0.3}});
  const auto grad = learner.gradient_estimate_semi(0.5);
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("unsampled facilities contribute zero to the semi gradient") {
  PlayerLearner learner({{0}, {1}}, 2, Feedback::SemiBandit, 1e-3);
  learner.observe_semi(0, {{0, 1.0}});
  const auto grad = learner.gradient_estimate_semi(0.0);
  CHECK(grad[0] > 0.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("semi-bandit estimator is unbiased for the load vector") {
  const std::vector<std::vector<int>> actions{{0}, {1}, {0, 1}};
  PlayerLearner learner(actions, 2, Feedback::SemiBandit, 1e-3);
  const double mu[2] = {0.7, 0.25};
  Rng rng(71);
  const int n = 20000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (int t = 0; t < n; ++t) {
    const int a = learner.sample_action(rng);
    std::vector<std::pair<int, double>> obs;
    for (int f : actions[static_cast<std::size_t>(a)])
      obs.emplace_back(f, rng.bernoulli(mu[f]) ? 1.0 : 0.0);
    learner.observe_semi(a, obs);
    const auto grad = learner.gradient_estimate_semi(0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      sum[j] += grad[j];
      sq[j] += grad[j] * grad[j];
    }
  }
  const double expected[3] = {mu[0], mu[1], mu[0] + mu[1]};
  for (std::size_t j = 0; j < 3; ++j) {
    const double mean = sum[j] / n;
    const double se = std::sqrt((sq[j] / n - mean * mean) / n);
    CHECK(std::abs(mean - expected[j]) <= 3.0 * se);
  }
}

TEST_CASE("fw_gap vanishes at equilibrium and dominates the Nash gap") {
  const CongestionGame g = shared_facility_game();
  CHECK(fw_gap(g, ProductPolicy::deterministic({1, 1}, g.action_counts())) == 0.0);

  const CongestionGame random = generate_random_game(3, 3, 4, false, 5150);
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    ProductPolicy pi;
    for (int i = 0; i < random.num_players(); ++i) {
      std::vector<double> row(random.num_actions(i));
      double s = 0.0;
      for (double& p : row) {
        p = rng.uniform() + 1e-3;
        s += p;
      }
      for (double& p : row) p /= s;
      pi.probs.push_back(std::move(row));
    }
    CHECK(fw_gap(random, pi) >= random.nash_gap(pi) - 1e-9);
  }
}

TEST_CASE("full exploration weight pins the policy to the design") {
  const CongestionGame g = shared_facility_game();
  FwConfig cfg;
  cfg.episodes = 5;
  cfg.rounds_per_episode = 2;
  cfg.gamma = 1.0;
  cfg.nu = 0.5;
  cfg.feedback = Feedback::SemiBandit;
  const PlayerLearner fresh(g.actions(0), g.num_facilities(), Feedback::SemiBandit, 1e-3);
  run_frank_wolfe(g, cfg, 3, [&](long long k, const ProductPolicy& pi) {
    if (k == 1) return;  // first episode shows the uniform initialization
    for (const auto& row : pi.probs)
      for (std::size_t a = 0; a < row.size(); ++a)
        CHECK(row[a] == doctest::Approx(fresh.exploration()[a]).epsilon(1e-12));
  });
}

TEST_CASE("single player with a single action has zero gap throughout") {
  const CongestionGame g(1, 1, {{{0}}}, {{0.6}});
  FwConfig cfg;
  cfg.episodes = 4;
  cfg.rounds_per_episode = 3;
  cfg.gamma = 0.1;
  cfg.nu = 0.2;
  cfg.feedback = Feedback::SemiBandit;
  const RegretTrace trace = run_frank_wolfe(g, cfg, 1);
  REQUIRE(trace.rows.size() == 4);
  for (const TraceRow& row : trace.rows) {
    CHECK(row.gap == 0.0);
    CHECK(row.stage_rounds == 0);
    CHECK(row.converged);
  }
  CHECK(trace.final_regret() == 0.0);
}

TEST_CASE("default schedule enforces the episode floor") {
  const CongestionGame g(1, 9, {{{0}, {1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}}},
                         std::vector<std::vector<double>>(9, {0.5}));
  FwConfig cfg;
  cfg.episodes = 2;  // below 2*sqrt(9)/1 = 6
  cfg.schedule = FwSchedule::TheoremDefault;
  cfg.feedback = Feedback::SemiBandit;
  CHECK_THROWS_AS(run_frank_wolfe(g, cfg, 1), std::invalid_argument);
}

TEST_CASE("config feedback must match the game") {
  const CongestionGame g = shared_facility_game(Feedback::Bandit);
  FwConfig cfg;
  cfg.episodes = 2;
  cfg.rounds_per_episode = 1;
  cfg.feedback = Feedback::SemiBandit;
  CHECK_THROWS_AS(run_frank_wolfe(g, cfg, 1), std::invalid_argument);
}

TEST_CASE("regret accumulates gap times the round count") {
  const CongestionGame g = shared_facility_game();
  FwConfig cfg;
  cfg.episodes = 6;
  cfg.rounds_per_episode = 7;
  cfg.gamma = 0.2;
  cfg.nu = 0.3;
  cfg.feedback = Feedback::SemiBandit;
  const RegretTrace trace = run_frank_wolfe(g, cfg, 11);
  double cum = 0.0;
  for (const TraceRow& row : trace.rows) {
    cum += row.gap * 7.0;
    CHECK(row.cum_regret == doctest::Approx(cum).epsilon(1e-12));
  }
}

TEST_CASE("same seed reproduces the run byte for byte") {
  for (Feedback fb : {Feedback::SemiBandit, Feedback::Bandit}) {
    const CongestionGame g = generate_random_game(2, 2, 3, true, 616, {}, fb);
    FwConfig cfg;
    cfg.episodes = 10;
    cfg.rounds_per_episode = 5;
    cfg.gamma = 0.2;
    cfg.nu = 0.3;
    cfg.feedback = fb;
    const RegretTrace a = run_frank_wolfe(g, cfg, 5);
    const RegretTrace b = run_frank_wolfe(g, cfg, 5);
    CHECK(trace_to_csv(a, 2) == trace_to_csv(b, 2));
  }
}
