#include "congestion/generators.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>

namespace congestion {

CongestionGame generate_random_game(int num_players, int num_facilities, int actions_per_player,
                                    bool monotone, std::uint64_t seed, NoiseModel noise,
                                    Feedback feedback) {
  if (num_facilities < 1 || num_facilities > 62)
    throw std::invalid_argument("facility count must be in 1..62");
  if (actions_per_player < 1 ||
      static_cast<std::uint64_t>(actions_per_player) > (1ULL << num_facilities))
    throw std::invalid_argument("actions_per_player must be in 1..2^F");

  Rng rng(seed);
  std::vector<std::vector<double>> rewards(
      static_cast<std::size_t>(num_facilities),
      std::vector<double>(static_cast<std::size_t>(num_players), 0.0));
  for (auto& row : rewards) {
    for (double& r : row) r = rng.uniform();
    if (monotone) std::sort(row.begin(), row.end(), std::greater<double>());
  }

  std::vector<std::vector<Action>> action_sets;
  const std::uint64_t num_subsets = 1ULL << num_facilities;
  for (int i = 0; i < num_players; ++i) {
    std::set<std::uint64_t> masks;
    while (masks.size() < static_cast<std::size_t>(actions_per_player))
      masks.insert(rng.next_u64() % num_subsets);
    std::vector<Action> actions;
    for (std::uint64_t mask : masks) {
      Action a;
      for (int f = 0; f < num_facilities; ++f)
        if (mask & (1ULL << f)) a.push_back(f);
      actions.push_back(std::move(a));
    }
    action_sets.push_back(std::move(actions));
  }
  return CongestionGame(num_players, num_facilities, std::move(action_sets), std::move(rewards),
                        noise, feedback);
}

CongestionGame generate_routing_game(const RoutingGameSpec& spec, std::uint64_t seed,
                                     NoiseModel noise, Feedback feedback) {
  if (spec.width < 1 || spec.height < 1) throw std::invalid_argument("grid must be at least 1x1");
  if (spec.path_cap < 1) throw std::invalid_argument("path cap must be >= 1");
  if (spec.players.empty()) throw std::invalid_argument("need at least one player");
  const int W = spec.width;
  const int H = spec.height;
  const int nodes = W * H;

  // Edge ids in row-major node order: the rightward edge of a node, then its
  // downward edge.
  std::vector<std::vector<std::pair<int, int>>> out_edges(static_cast<std::size_t>(nodes));
  int num_edges = 0;
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const int node = r * W + c;
      if (c + 1 < W) out_edges[static_cast<std::size_t>(node)].push_back({num_edges++, node + 1});
      if (r + 1 < H) out_edges[static_cast<std::size_t>(node)].push_back({num_edges++, node + W});
    }
  }

  std::vector<std::vector<Action>> action_sets;
  for (std::size_t i = 0; i < spec.players.size(); ++i) {
    const auto [source, sink] = spec.players[i];
    if (source < 0 || source >= nodes || sink < 0 || sink >= nodes)
      throw std::invalid_argument("player " + std::to_string(i + 1) + ": node id out of range");
    if (source == sink)
      throw std::invalid_argument("player " + std::to_string(i + 1) + ": source equals sink");

    std::vector<Action> paths;
    std::vector<bool> visited(static_cast<std::size_t>(nodes), false);
    Action current;
    std::function<void(int)> dfs = [&](int node) {
      if (static_cast<long long>(paths.size()) >= spec.path_cap) return;
      if (node == sink) {
        paths.push_back(current);
        return;
      }
      visited[static_cast<std::size_t>(node)] = true;
      for (const auto& [edge, next] : out_edges[static_cast<std::size_t>(node)]) {
        if (visited[static_cast<std::size_t>(next)]) continue;
        current.push_back(edge);
        dfs(next);
        current.pop_back();
      }
      visited[static_cast<std::size_t>(node)] = false;
    };
    dfs(source);
    if (paths.empty())
      throw std::invalid_argument("player " + std::to_string(i + 1) +
                                  ": no path from source to sink");
    action_sets.push_back(std::move(paths));
  }

  const int m = static_cast<int>(spec.players.size());
  Rng rng(seed);
  std::vector<std::vector<double>> rewards(static_cast<std::size_t>(num_edges),
                                           std::vector<double>(static_cast<std::size_t>(m), 0.0));
  for (auto& row : rewards) {
    for (double& r : row) r = rng.uniform();
    std::sort(row.begin(), row.end(), std::greater<double>());
  }
  return CongestionGame(m, num_edges, std::move(action_sets), std::move(rewards), noise, feedback);
}

}  // namespace congestion
