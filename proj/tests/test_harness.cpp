#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "congestion/generators.hpp"
#include "congestion/json_io.hpp"
#include "congestion/runner.hpp"
#include "congestion/trace.hpp"

using namespace congestion;

namespace {

namespace fs = std::filesystem;

// Fresh scratch directory per test, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("congestion_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& name = "") const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("experiment config parsing") {
  const ExperimentConfig cfg = config_from_json(R"({
    "spec_path": "game.json",
    "algorithm": "fw-semi",
    "K": 40,
    "seeds": [1, 2, 3],
    "output_dir": "out",
    "gamma": 0.05,
    "nu": 0.1,
    "tau": 400
  })");
  CHECK(cfg.spec_path == "game.json");
  CHECK(cfg.algorithm == "fw-semi");
  CHECK(cfg.episodes == 40);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.gamma == 0.05);
  CHECK(cfg.nu == 0.1);
  CHECK(cfg.tau == 400);
  CHECK_FALSE(cfg.delta);
  CHECK_FALSE(cfg.eps_stage);
  CHECK_FALSE(cfg.design_tol);
}

TEST_CASE("game JSON round-trips to identical bytes") {
  const CongestionGame g =
      generate_random_game(2, 3, 4, true, 11, {NoiseKind::TruncatedGaussian, 0.2},
                           Feedback::Bandit);
  const std::string first = game_to_json(g);
  const std::string second = game_to_json(game_from_json(first));
  CHECK(first == second);
  const CongestionGame back = game_from_json(first);
  CHECK(back.num_players() == 2);
  CHECK(back.num_facilities() == 3);
  CHECK(back.feedback() == Feedback::Bandit);
  CHECK(back.noise().kind == NoiseKind::TruncatedGaussian);
  CHECK(back.noise().sigma == 0.2);
  CHECK(back.reward_table() == g.reward_table());
}

TEST_CASE("random game generation is deterministic per seed") {
  const std::string a = game_to_json(generate_random_game(3, 5, 6, true, 77));
  const std::string b = game_to_json(generate_random_game(3, 5, 6, true, 77));
  const std::string c = game_to_json(generate_random_game(3, 5, 6, true, 78));
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("generated instances match the committed golden file") {
  const CongestionGame g = generate_random_game(2, 3, 4, true, 11);
  CHECK(game_to_json(g) == read_file(std::string(TEST_DATA_DIR) + "/golden_game_seed11.json"));
}

TEST_CASE("monotone games have non-increasing facility rewards") {
  const CongestionGame g = generate_random_game(4, 6, 5, true, 123);
  for (int f = 0; f < g.num_facilities(); ++f)
    for (int n = 1; n < g.num_players(); ++n)
      CHECK(g.mean_reward(f, n) >= g.mean_reward(f, n + 1));
}

TEST_CASE("generator input validation") {
  CHECK_THROWS_AS(generate_random_game(2, 63, 2, false, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_random_game(2, 2, 5, false, 1), std::invalid_argument);  // > 2^F
}

TEST_CASE("grid routing games") {
  SUBCASE("a 2x1 grid has a single one-edge path") {
    RoutingGameSpec spec;
    spec.width = 2;
    spec.height = 1;
    spec.players = {{0, 1}};
    const CongestionGame g = generate_routing_game(spec, 5);
    CHECK(g.num_facilities() == 1);
    REQUIRE(g.num_actions(0) == 1);
    CHECK(g.action(0, 0) == Action{0});
  }
  SUBCASE("a 2x2 grid has exactly two corner-to-corner paths") {
    RoutingGameSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.players = {{0, 3}, {0, 3}};
    const CongestionGame g = generate_routing_game(spec, 5);
    CHECK(g.num_facilities() == 4);
    CHECK(g.num_actions(0) == 2);
    CHECK(g.num_actions(1) == 2);
    for (std::size_t a = 0; a < 2; ++a) CHECK(g.action(0, static_cast<int>(a)).size() == 2);
  }
  SUBCASE("the path cap limits the action list") {
    RoutingGameSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.players = {{0, 3}};
    spec.path_cap = 1;
    CHECK(generate_routing_game(spec, 5).num_actions(0) == 1);
  }
  SUBCASE("unreachable sinks and degenerate pairs are rejected") {
    RoutingGameSpec spec;
    spec.width = 2;
    spec.height = 2;
    spec.players = {{3, 0}};  // edges only point right/down
    CHECK_THROWS_AS(generate_routing_game(spec, 5), std::invalid_argument);
    spec.players = {{1, 1}};
    CHECK_THROWS_AS(generate_routing_game(spec, 5), std::invalid_argument);
    spec.players = {{0, 9}};
    CHECK_THROWS_AS(generate_routing_game(spec, 5), std::invalid_argument);
  }
  SUBCASE("edge rewards are monotone in the user count") {
    RoutingGameSpec spec;
    spec.width = 3;
    spec.height = 3;
    spec.players = {{0, 8}, {0, 8}, {1, 8}};
    const CongestionGame g = generate_routing_game(spec, 5);
    for (int f = 0; f < g.num_facilities(); ++f)
      for (int n = 1; n < g.num_players(); ++n)
        CHECK(g.mean_reward(f, n) >= g.mean_reward(f, n + 1));
  }
}

TEST_CASE("trace CSV verification") {
  SUBCASE("well-formed traces pass") {
    const std::string csv =
        "k,gap,cum_regret,ms,reward_p1,stage_rounds,converged\n"
        "1,0.5,0.5,0,0.3,2,1\n"
        "2,0.25,0.75,0,0.4,1,1\n";
    CHECK(verify_trace_csv(csv).ok);
  }
  SUBCASE("a constant multiplier is inferred") {
    const std::string csv =
        "k,gap,cum_regret,ms,reward_p1,stage_rounds,converged\n"
        "1,0.5,5,0,0.3,0,1\n"
        "2,0.25,7.5,0,0.4,0,1\n";
    CHECK(verify_trace_csv(csv).ok);
  }
  SUBCASE("broken prefix sums fail") {
    const std::string csv =
        "k,gap,cum_regret,ms,reward_p1,stage_rounds,converged\n"
        "1,0.5,0.5,0,0.3,2,1\n"
        "2,0.25,0.9,0,0.4,1,1\n";
    const TraceCheck check = verify_trace_csv(csv);
    CHECK_FALSE(check.ok);
  }
  SUBCASE("negative gaps fail") {
    const std::string csv =
        "k,gap,cum_regret,ms,reward_p1,stage_rounds,converged\n"
        "1,-0.1,-0.1,0,0.3,2,1\n";
    CHECK_FALSE(verify_trace_csv(csv).ok);
  }
  SUBCASE("missing header fails") { CHECK_FALSE(verify_trace_csv("1,0.5,0.5,0,0.3,2,1\n").ok); }
}

TEST_CASE("run_experiment writes deterministic artifacts") {
  TempDir dir("runner");
  const CongestionGame g = generate_random_game(2, 2, 3, true, 9);
  write_file(dir.str("game.json"), game_to_json(g));

  ExperimentConfig cfg;
  cfg.spec_path = dir.str("game.json");
  cfg.algorithm = "nash-ucb-semi";
  cfg.episodes = 20;
  cfg.seeds = {1, 2};
  cfg.output_dir = dir.str("out");

  const auto summaries = run_experiment(cfg);
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].seed == 1);
  CHECK(summaries[1].seed == 2);

  const std::string trace1 = read_file(dir.str("out/trace_nash-ucb-semi_1.csv"));
  const std::string trace2 = read_file(dir.str("out/trace_nash-ucb-semi_2.csv"));
  const std::string summary = read_file(dir.str("out/summary.json"));
  CHECK(verify_trace_csv(trace1).ok);
  CHECK(verify_trace_csv(trace2).ok);
  CHECK(summary.find("\"algorithm\": \"nash-ucb-semi\"") != std::string::npos);

  // Byte-identical on a re-run.
  cfg.output_dir = dir.str("out2");
  run_experiment(cfg);
  CHECK(read_file(dir.str("out2/trace_nash-ucb-semi_1.csv")) == trace1);
  CHECK(read_file(dir.str("out2/trace_nash-ucb-semi_2.csv")) == trace2);

  // The ms column is deterministically zero.
  std::istringstream in(trace1);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string field;
    for (int c = 0; c <= 3; ++c) std::getline(fields, field, ',');
    CHECK(field == "0");
  }
}

TEST_CASE("run_experiment rejects mismatched algorithms") {
  TempDir dir("mismatch");
  const CongestionGame g = generate_random_game(2, 2, 3, true, 9);  // semi-bandit spec
  write_file(dir.str("game.json"), game_to_json(g));

  ExperimentConfig cfg;
  cfg.spec_path = dir.str("game.json");
  cfg.algorithm = "fw-bandit";
  cfg.episodes = 5;
  cfg.seeds = {1};
  cfg.output_dir = dir.str("out");
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);

  cfg.algorithm = "no-such-algorithm";
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);

  // Manual Frank-Wolfe schedules need all three knobs.
  cfg.algorithm = "fw-semi";
  cfg.gamma = 0.1;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("frank-wolfe traces verify with their round multiplier") {
  TempDir dir("fw");
  write_file(dir.str("game.json"), game_to_json(generate_random_game(2, 2, 3, true, 9)));

  ExperimentConfig cfg;
  cfg.spec_path = dir.str("game.json");
  cfg.algorithm = "fw-semi";
  cfg.episodes = 10;
  cfg.seeds = {4};
  cfg.gamma = 0.2;
  cfg.nu = 0.3;
  cfg.tau = 25;
  cfg.output_dir = dir.str("out");
  run_experiment(cfg);
  CHECK(verify_trace_csv(read_file(dir.str("out/trace_fw-semi_4.csv"))).ok);
}

TEST_CASE("markov spec JSON round-trips") {
  ImcgSpec spec;
  spec.horizon = 2;
  spec.num_players = 2;
  FacilityDynamics fac;
  fac.S = 2;
  fac.transitions = {
      {{{1.0, 0.0}, {0.3, 0.7}, {0.5, 0.5}}, {{0.0, 1.0}, {0.6, 0.4}, {0.5, 0.5}}},
      {{{1.0, 0.0}, {0.3, 0.7}, {0.5, 0.5}}, {{0.0, 1.0}, {0.6, 0.4}, {0.5, 0.5}}}};
  fac.rewards = {{{0.9, 0.4}, {0.3, 0.1}}, {{0.9, 0.4}, {0.3, 0.1}}};
  spec.facilities.push_back(fac);
  spec.action_sets = {{{}, {0}}, {{}, {0}}};
  spec.initial_state = {0};
  spec.validate();

  const std::string first = imcg_to_json(spec);
  const std::string second = imcg_to_json(imcg_from_json(first));
  CHECK(first == second);
  const ImcgSpec back = imcg_from_json(first);
  CHECK(back.horizon == 2);
  CHECK(back.facilities[0].transitions == fac.transitions);
  CHECK(back.facilities[0].rewards == fac.rewards);
}
