#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "congestion/generators.hpp"
#include "congestion/json_io.hpp"
#include "congestion/runner.hpp"
#include "congestion/trace.hpp"

namespace {

// "WxH" -> (width, height)
std::pair<int, int> parse_grid(const std::string& text) {
  const std::size_t x = text.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= text.size())
    throw CLI::ValidationError("--grid", "expected WxH, e.g. 3x2");
  return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
}

// "s1>t1,s2>t2" -> [(s1,t1),(s2,t2)]
std::vector<std::pair<int, int>> parse_players(const std::string& text) {
  std::vector<std::pair<int, int>> players;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string part = text.substr(pos, comma - pos);
    const std::size_t gt = part.find('>');
    if (gt == std::string::npos || gt == 0 || gt + 1 >= part.size())
      throw CLI::ValidationError("--players", "expected comma-separated s>t pairs");
    players.push_back({std::stoi(part.substr(0, gt)), std::stoi(part.substr(gt + 1))});
    pos = comma + 1;
  }
  return players;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congestion-game learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Config JSON path")->required();

  int m = 2;
  int F = 3;
  int actions = 4;
  bool monotone = false;
  std::uint64_t seed = 0;
  std::string out_path;
  CLI::App* gen_random = app.add_subcommand("gen-random", "Generate a random game JSON");
  gen_random->add_option("--m", m, "Players")->required();
  gen_random->add_option("--F", F, "Facilities")->required();
  gen_random->add_option("--actions", actions, "Actions per player")->required();
  gen_random->add_flag("--monotone", monotone, "Non-increasing facility rewards");
  gen_random->add_option("--seed", seed, "Seed")->required();
  gen_random->add_option("--out", out_path, "Output path")->required();

  std::string grid_text;
  std::string players_text;
  long long cap = 100;
  std::uint64_t routing_seed = 0;
  std::string routing_out;
  CLI::App* gen_routing = app.add_subcommand("gen-routing", "Generate a grid routing game JSON");
  gen_routing->add_option("--grid", grid_text, "Grid size WxH")->required();
  gen_routing->add_option("--players", players_text, "Per-player s>t node pairs")->required();
  gen_routing->add_option("--cap", cap, "Max simple paths per player");
  gen_routing->add_option("--seed", routing_seed, "Seed")->required();
  gen_routing->add_option("--out", routing_out, "Output path")->required();

  std::string trace_path;
  CLI::App* verify = app.add_subcommand("verify", "Re-check trace integrity invariants");
  verify->add_option("--trace", trace_path, "Trace CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const congestion::ExperimentConfig cfg =
          congestion::config_from_json(congestion::read_file(config_path));
      const auto summaries = congestion::run_experiment(cfg);
      for (const auto& s : summaries)
        std::printf("seed %llu: final_regret=%.6g best_iterate_gap=%.6g (episode %lld)\n",
                    static_cast<unsigned long long>(s.seed), s.final_regret, s.best_iterate_gap,
                    s.best_iterate_episode);
    } else if (gen_random->parsed()) {
      const congestion::CongestionGame game =
          congestion::generate_random_game(m, F, actions, monotone, seed);
      congestion::write_file(out_path, congestion::game_to_json(game));
      std::printf("wrote %s\n", out_path.c_str());
    } else if (gen_routing->parsed()) {
      congestion::RoutingGameSpec spec;
      const auto [width, height] = parse_grid(grid_text);
      spec.width = width;
      spec.height = height;
      spec.players = parse_players(players_text);
      spec.path_cap = cap;
      const congestion::CongestionGame game =
          congestion::generate_routing_game(spec, routing_seed);
      congestion::write_file(routing_out, congestion::game_to_json(game));
      std::printf("wrote %s\n", routing_out.c_str());
    } else if (verify->parsed()) {
      const congestion::TraceCheck check =
          congestion::verify_trace_csv(congestion::read_file(trace_path));
      std::printf("%s: %s\n", check.ok ? "ok" : "FAIL", check.message.c_str());
      return check.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
