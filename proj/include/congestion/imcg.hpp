#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "congestion/equilibrium.hpp"
#include "congestion/game.hpp"
#include "congestion/nash_ucb.hpp"
#include "congestion/trace.hpp"

namespace congestion {

// One state component per facility.
using FactoredState = std::vector<int>;

struct FacilityDynamics {
  int S = 1;
  // transitions[h][s][n][s'], h in 0..H-1, n in 0..m; each row is a
  // probability vector.
  std::vector<std::vector<std::vector<std::vector<double>>>> transitions;
  // rewards[h][s][n-1] in [0,1], n in 1..m.
  std::vector<std::vector<std::vector<double>>> rewards;
};

// A finite-horizon Markov game whose state, transition and reward all
// factorize per facility; at each step the players face a congestion game
// whose reward table is indexed by the current facility states.
struct ImcgSpec {
  int horizon = 1;
  int num_players = 0;
  std::vector<FacilityDynamics> facilities;
  std::vector<std::vector<Action>> action_sets;
  FactoredState initial_state;
  NoiseModel noise;
  Feedback feedback = Feedback::SemiBandit;

  int num_facilities() const { return static_cast<int>(facilities.size()); }
  int total_facility_states() const;  // sum_f S^f
  long long num_states() const;       // prod_f S^f
  long long encode_state(const FactoredState& s) const;
  FactoredState decode_state(long long index) const;
  std::vector<std::size_t> action_counts() const;

  void validate() const;  // throws std::invalid_argument

  // The stage congestion game at (step h, factored state s): same players,
  // actions and noise, reward table r^f(n) = rewards[h][s^f][n-1].
  CongestionGame stage_game(int h, const FactoredState& s) const;
};

// policies[h][encoded state]; an empty profile marks an undefined entry.
using MarkovPolicy = std::vector<std::vector<DeterministicProfile>>;

struct ImcgStep {
  FactoredState state;
  DeterministicProfile action;
  std::vector<double> realized;  // per facility, -1 for unused
  std::vector<Observation> observations;
};
using EpisodeLog = std::vector<ImcgStep>;

// Plays one episode from the initial state. Stage draws use
// base.substream(episode, h+1, 0) and match the one-shot game's sampling
// stream layout; transition draws use base.substream(episode, h+1, 1) and a
// transition row with a single nonzero entry consumes no randomness. No
// transition is sampled after the last step.
EpisodeLog imcg_rollout(const ImcgSpec& spec, const MarkovPolicy& policies, const Rng& base,
                        std::uint64_t episode);

// Per-(h, f, s^f, n) visit counts, reward sums and next-state counts.
class MarkovCounter {
 public:
  explicit MarkovCounter(const ImcgSpec& spec);

  void record_visit(int h, int f, int s, int n) { ++visits_[key(h, f, s, n)]; }
  void record_reward(int h, int f, int s, int n, double r) { reward_sum_[key(h, f, s, n)] += r; }
  void record_transition(int h, int f, int s, int n, int s_next);
  // Test hook: overwrite a visit count directly.
  void inject_visits(int h, int f, int s, int n, long long count) {
    visits_[key(h, f, s, n)] = count;
  }

  long long visits(int h, int f, int s, int n) const { return visits_[key(h, f, s, n)]; }
  double mean_reward(int h, int f, int s, int n) const;
  // Empirical transition row; all-mass-on-self when nothing was recorded.
  std::vector<double> p_hat_row(int h, int f, int s, int n) const;

 private:
  std::size_t key(int h, int f, int s, int n) const;

  int horizon_;
  int num_players_;
  std::vector<int> state_sizes_;
  std::vector<std::size_t> offsets_;  // per facility, into the flat arrays
  std::size_t stride_h_ = 0;
  std::vector<long long> visits_;
  std::vector<double> reward_sum_;
  std::vector<std::vector<long long>> next_counts_;  // same key, length S^f
};

// Confidence width covering the estimated-transition value error:
// sum_f sqrt(4 H^2 F^2 S^f iota / (N_f v 1))
//   + sum over ordered pairs f != f' of
//     sqrt(4 H^2 F^2 (S^f S^f' iota)^2 / (N_f N_f' v 1)).
double transition_bonus(const MarkovCounter& counter, const ImcgSpec& spec, int h,
                        const FactoredState& s, const CountProfile& counts, double iota);

// Optimistic immediate term (reward estimate plus all bonuses) for one
// player at (step, state, joint action).
using StageValueFn =
    std::function<double(int h, const FactoredState& s, const DeterministicProfile& a, int player)>;
// Estimated transition row for one facility.
using TransitionRowFn = std::function<std::vector<double>(int h, int f, int s, int n)>;

struct PlanResult {
  MarkovPolicy policies;  // dense over all encoded states
  // values[h][state][player], h in 0..H (values[H] is all zero).
  std::vector<std::vector<std::vector<double>>> values;
  long long stage_rounds = 0;
  bool converged = true;
  // Clipped optimistic Q at any (h, s, a, i); valid while the estimators the
  // plan was built from are unchanged.
  std::function<double(int h, const FactoredState& s, const DeterministicProfile& a, int player)>
      qbar;
};

// Backward induction h = H-1..0 over all factored states: Q = clip(stage
// value + estimated-transition expectation of the next-step value, [0, HF]),
// stage profiles from the greedy best-response solver (cap ceil(m*HF/eps)).
PlanResult nash_vi_plan(const ImcgSpec& spec, const StageValueFn& stage_value,
                        const TransitionRowFn& p_hat, double eps,
                        const MarkovPolicy* warm_start = nullptr);

struct ViConfig {
  long long episodes = 0;  // K
  double delta = 0.01;
  double eps_stage = 0.0;  // 0 means the 1/(KH) default
  Feedback feedback = Feedback::SemiBandit;
  std::optional<double> iota_override;  // tests only
};

// iota = 2 log(4 (m+1) (sum_f S^f) KH / delta).
double vi_iota(const ImcgSpec& spec, long long episodes, double delta);

using ViObserver =
    std::function<void(long long episode, const PlanResult& plan, const EpisodeLog& log)>;

RegretTrace run_nash_vi(const ImcgSpec& spec, const ViConfig& cfg, std::uint64_t seed,
                        const ViObserver& observer = {});

// Exact max_i (best-response value - policy value) at (step 0, initial
// state), via per-player best-response dynamic programming under the true
// model; clipped to 0 when within -1e-9.
double markov_nash_gap(const ImcgSpec& spec, const MarkovPolicy& policies);

}  // namespace congestion
