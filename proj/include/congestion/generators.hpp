#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "congestion/game.hpp"

namespace congestion {

// Random instance factory: rewards uniform in [0,1] (sorted non-increasing in
// the count when monotone is set), action subsets of the facility set sampled
// without replacement per player. Deterministic per seed.
CongestionGame generate_random_game(int num_players, int num_facilities, int actions_per_player,
                                    bool monotone, std::uint64_t seed,
                                    NoiseModel noise = {}, Feedback feedback = Feedback::SemiBandit);

struct RoutingGameSpec {
  int width = 1;   // columns of nodes
  int height = 1;  // rows of nodes
  // Per-player (source node, sink node); nodes are numbered row-major.
  std::vector<std::pair<int, int>> players;
  long long path_cap = 100;  // max simple paths enumerated per player
};

// Directed grid routing instance: edges point right and down, facilities are
// the edges, actions are simple source-to-sink paths (DFS in ascending edge
// id order, up to the cap). Edge rewards are random, non-increasing in the
// user count.
CongestionGame generate_routing_game(const RoutingGameSpec& spec, std::uint64_t seed,
                                     NoiseModel noise = {},
                                     Feedback feedback = Feedback::SemiBandit);

}  // namespace congestion
