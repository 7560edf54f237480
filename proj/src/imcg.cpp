#include "congestion/imcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace congestion {

namespace {

CountProfile counts_of(const ImcgSpec& spec, const DeterministicProfile& a) {
  CountProfile counts(static_cast<std::size_t>(spec.num_facilities()), 0);
  for (int i = 0; i < spec.num_players; ++i)
    for (int f : spec.action_sets[static_cast<std::size_t>(i)][static_cast<std::size_t>(
             a[static_cast<std::size_t>(i)])])
      ++counts[static_cast<std::size_t>(f)];
  return counts;
}

// Iterates the joint next-state distribution given per-facility rows.
void for_each_next_state(const std::vector<std::vector<double>>& rows,
                         const std::vector<long long>& strides,
                         const std::function<void(long long, double)>& visit) {
  std::function<void(std::size_t, long long, double)> walk = [&](std::size_t f, long long idx,
                                                                 double p) {
    if (p == 0.0) return;
    if (f == rows.size()) {
      visit(idx, p);
      return;
    }
    for (std::size_t s = 0; s < rows[f].size(); ++s)
      if (rows[f][s] > 0.0)
        walk(f + 1, idx + static_cast<long long>(s) * strides[f], p * rows[f][s]);
  };
  walk(0, 0, 1.0);
}

std::vector<long long> state_strides(const ImcgSpec& spec) {
  std::vector<long long> strides(spec.facilities.size(), 1);
  for (std::size_t f = 1; f < spec.facilities.size(); ++f)
    strides[f] = strides[f - 1] * spec.facilities[f - 1].S;
  return strides;
}

double pv_bonus_impl(const MarkovCounter& counter, const ImcgSpec& spec, int h,
                     const FactoredState& s, const CountProfile& counts, double iota,
                     bool skip_single_state) {
  const double H = static_cast<double>(spec.horizon);
  const double F = static_cast<double>(spec.num_facilities());
  double bonus = 0.0;
  for (int f = 0; f < spec.num_facilities(); ++f) {
    const double Sf = static_cast<double>(spec.facilities[static_cast<std::size_t>(f)].S);
    if (skip_single_state && Sf <= 1.0) continue;
    const double Nf = static_cast<double>(std::max<long long>(
        counter.visits(h, f, s[static_cast<std::size_t>(f)], counts[static_cast<std::size_t>(f)]),
        1));
    bonus += std::sqrt(4.0 * H * H * F * F * Sf * iota / Nf);
    for (int g = 0; g < spec.num_facilities(); ++g) {
      if (g == f) continue;
      const double Sg = static_cast<double>(spec.facilities[static_cast<std::size_t>(g)].S);
      if (skip_single_state && Sg <= 1.0) continue;
      const double Ng = static_cast<double>(std::max<long long>(
          counter.visits(h, g, s[static_cast<std::size_t>(g)],
                         counts[static_cast<std::size_t>(g)]),
          1));
      const double pair = Sf * Sg * iota;
      bonus += std::sqrt(4.0 * H * H * F * F * pair * pair / std::max(Nf * Ng, 1.0));
    }
  }
  return bonus;
}

std::vector<int> markov_feature_slots(const ImcgSpec& spec, const std::vector<int>& slot_base,
                                      const FactoredState& s, const DeterministicProfile& a,
                                      const CountProfile& counts, int player) {
  const int m = spec.num_players;
  std::vector<int> slots;
  for (int f : spec.action_sets[static_cast<std::size_t>(player)][static_cast<std::size_t>(
           a[static_cast<std::size_t>(player)])])
    slots.push_back(slot_base[static_cast<std::size_t>(f)] +
                    s[static_cast<std::size_t>(f)] * m + counts[static_cast<std::size_t>(f)] - 1);
  return slots;
}

}  // namespace

int ImcgSpec::total_facility_states() const {
  int total = 0;
  for (const FacilityDynamics& fac : facilities) total += fac.S;
  return total;
}

long long ImcgSpec::num_states() const {
  long long total = 1;
  for (const FacilityDynamics& fac : facilities) total *= fac.S;
  return total;
}

long long ImcgSpec::encode_state(const FactoredState& s) const {
  long long index = 0;
  long long stride = 1;
  for (std::size_t f = 0; f < facilities.size(); ++f) {
    index += static_cast<long long>(s[f]) * stride;
    stride *= facilities[f].S;
  }
  return index;
}

FactoredState ImcgSpec::decode_state(long long index) const {
  FactoredState s(facilities.size(), 0);
  for (std::size_t f = 0; f < facilities.size(); ++f) {
    s[f] = static_cast<int>(index % facilities[f].S);
    index /= facilities[f].S;
  }
  return s;
}

std::vector<std::size_t> ImcgSpec::action_counts() const {
  std::vector<std::size_t> counts;
  for (const auto& set : action_sets) counts.push_back(set.size());
  return counts;
}

void ImcgSpec::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (num_players < 1) throw std::invalid_argument("need at least one player");
  if (facilities.empty()) throw std::invalid_argument("need at least one facility");
  if (static_cast<int>(action_sets.size()) != num_players)
    throw std::invalid_argument("one action set per player required");
  if (initial_state.size() != facilities.size())
    throw std::invalid_argument("initial state must have one component per facility");

  const std::size_t H = static_cast<std::size_t>(horizon);
  const std::size_t n_rows = static_cast<std::size_t>(num_players) + 1;
  for (std::size_t f = 0; f < facilities.size(); ++f) {
    const FacilityDynamics& fac = facilities[f];
    const std::string where = "facility " + std::to_string(f);
    if (fac.S < 1) throw std::invalid_argument(where + ": S must be >= 1");
    if (initial_state[f] < 0 || initial_state[f] >= fac.S)
      throw std::invalid_argument(where + ": initial state out of range");
    if (fac.transitions.size() != H || fac.rewards.size() != H)
      throw std::invalid_argument(where + ": transition/reward tensors must have H entries");
    for (std::size_t h = 0; h < H; ++h) {
      if (fac.transitions[h].size() != static_cast<std::size_t>(fac.S) ||
          fac.rewards[h].size() != static_cast<std::size_t>(fac.S))
        throw std::invalid_argument(where + ": tensors must cover every state");
      for (std::size_t s = 0; s < static_cast<std::size_t>(fac.S); ++s) {
        if (fac.transitions[h][s].size() != n_rows)
          throw std::invalid_argument(where + ": transition rows must cover n in 0..m");
        for (const std::vector<double>& row : fac.transitions[h][s]) {
          if (row.size() != static_cast<std::size_t>(fac.S))
            throw std::invalid_argument(where + ": transition row has wrong length");
          double sum = 0.0;
          for (double p : row) {
            if (p < 0.0) throw std::invalid_argument(where + ": negative transition probability");
            sum += p;
          }
          if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(where + ": transition row does not sum to 1");
        }
        if (fac.rewards[h][s].size() != static_cast<std::size_t>(num_players))
          throw std::invalid_argument(where + ": reward rows must cover n in 1..m");
        for (double r : fac.rewards[h][s])
          if (r < 0.0 || r > 1.0) throw std::invalid_argument(where + ": reward outside [0,1]");
      }
    }
  }
  // Action-set validation (facility ids, duplicates, distinctness) is shared
  // with the one-shot game.
  (void)stage_game(0, initial_state);
}

CongestionGame ImcgSpec::stage_game(int h, const FactoredState& s) const {
  std::vector<std::vector<double>> table;
  table.reserve(facilities.size());
  for (std::size_t f = 0; f < facilities.size(); ++f)
    table.push_back(facilities[f].rewards[static_cast<std::size_t>(h)]
                                         [static_cast<std::size_t>(s[f])]);
  return CongestionGame(num_players, num_facilities(), action_sets, table, noise, feedback);
}

EpisodeLog imcg_rollout(const ImcgSpec& spec, const MarkovPolicy& policies, const Rng& base,
                        std::uint64_t episode) {
  const int H = spec.horizon;
  const int F = spec.num_facilities();
  FactoredState s = spec.initial_state;
  EpisodeLog log;
  for (int h = 0; h < H; ++h) {
    const long long sidx = spec.encode_state(s);
    if (static_cast<std::size_t>(h) >= policies.size() ||
        static_cast<std::size_t>(sidx) >= policies[static_cast<std::size_t>(h)].size() ||
        policies[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)].empty())
      throw std::invalid_argument("no policy for step " + std::to_string(h) + ", state " +
                                  std::to_string(sidx));
    const DeterministicProfile& profile =
        policies[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)];

    const CongestionGame stage = spec.stage_game(h, s);
    Rng round_rng = base.substream(episode, static_cast<std::uint64_t>(h) + 1, 0);
    auto [observations, realized] = stage.sample_round(profile, round_rng);
    log.push_back({s, profile, std::move(realized), std::move(observations)});

    if (h + 1 < H) {
      const CountProfile counts = counts_of(spec, profile);
      Rng trans_rng = base.substream(episode, static_cast<std::uint64_t>(h) + 1, 1);
      for (int f = 0; f < F; ++f) {
        const std::vector<double>& row =
            spec.facilities[static_cast<std::size_t>(f)]
                .transitions[static_cast<std::size_t>(h)][static_cast<std::size_t>(s[f])]
                            [static_cast<std::size_t>(counts[static_cast<std::size_t>(f)])];
        int support = 0;
        int only = 0;
        for (std::size_t s2 = 0; s2 < row.size(); ++s2)
          if (row[s2] > 0.0) {
            ++support;
            only = static_cast<int>(s2);
          }
        s[static_cast<std::size_t>(f)] = support == 1 ? only : trans_rng.categorical(row);
      }
    }
  }
  return log;
}

MarkovCounter::MarkovCounter(const ImcgSpec& spec)
    : horizon_(spec.horizon), num_players_(spec.num_players) {
  std::size_t offset = 0;
  for (const FacilityDynamics& fac : spec.facilities) {
    state_sizes_.push_back(fac.S);
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(fac.S) * static_cast<std::size_t>(num_players_ + 1);
  }
  stride_h_ = offset;
  const std::size_t total = stride_h_ * static_cast<std::size_t>(horizon_);
  visits_.assign(total, 0);
  reward_sum_.assign(total, 0.0);
  next_counts_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t within = k % stride_h_;
    std::size_t f = offsets_.size() - 1;
    while (within < offsets_[f]) --f;
    next_counts_[k].assign(static_cast<std::size_t>(state_sizes_[f]), 0);
  }
}

std::size_t MarkovCounter::key(int h, int f, int s, int n) const {
  return static_cast<std::size_t>(h) * stride_h_ + offsets_[static_cast<std::size_t>(f)] +
         static_cast<std::size_t>(s) * static_cast<std::size_t>(num_players_ + 1) +
         static_cast<std::size_t>(n);
}

void MarkovCounter::record_transition(int h, int f, int s, int n, int s_next) {
  ++next_counts_[key(h, f, s, n)][static_cast<std::size_t>(s_next)];
}

double MarkovCounter::mean_reward(int h, int f, int s, int n) const {
  const std::size_t k = key(h, f, s, n);
  return visits_[k] == 0 ? 0.0 : reward_sum_[k] / static_cast<double>(visits_[k]);
}

std::vector<double> MarkovCounter::p_hat_row(int h, int f, int s, int n) const {
  const std::size_t k = key(h, f, s, n);
  const std::vector<long long>& next = next_counts_[k];
  long long total = 0;
  for (long long c : next) total += c;
  std::vector<double> row(next.size(), 0.0);
  if (total == 0) {
    row[static_cast<std::size_t>(s)] = 1.0;  // self-loop convention
  } else {
    for (std::size_t s2 = 0; s2 < next.size(); ++s2)
      row[s2] = static_cast<double>(next[s2]) / static_cast<double>(total);
  }
  return row;
}

double transition_bonus(const MarkovCounter& counter, const ImcgSpec& spec, int h,
                        const FactoredState& s, const CountProfile& counts, double iota) {
  return pv_bonus_impl(counter, spec, h, s, counts, iota, false);
}

PlanResult nash_vi_plan(const ImcgSpec& spec, const StageValueFn& stage_value,
                        const TransitionRowFn& p_hat, double eps,
                        const MarkovPolicy* warm_start) {
  const int H = spec.horizon;
  const int m = spec.num_players;
  const int F = spec.num_facilities();
  const long long num_states = spec.num_states();
  if (num_states > 10000)
    throw std::invalid_argument("joint state space exceeds the 1e4 tabular guard");
  const double hf = static_cast<double>(H) * static_cast<double>(F);
  const std::vector<long long> strides = state_strides(spec);

  PlanResult result;
  result.policies.assign(static_cast<std::size_t>(H),
                         std::vector<DeterministicProfile>(static_cast<std::size_t>(num_states)));
  result.values.assign(static_cast<std::size_t>(H) + 1,
                       std::vector<std::vector<double>>(
                           static_cast<std::size_t>(num_states),
                           std::vector<double>(static_cast<std::size_t>(m), 0.0)));

  for (int h = H - 1; h >= 0; --h) {
    const auto& next_values = result.values[static_cast<std::size_t>(h) + 1];
    for (long long sidx = 0; sidx < num_states; ++sidx) {
      const FactoredState s = spec.decode_state(sidx);

      // Continuation values depend on the joint action only through the
      // count profile; memoize per (h, s).
      auto continuation = std::make_shared<std::map<CountProfile, std::vector<double>>>();
      auto lookup = [&, continuation](const CountProfile& counts) -> const std::vector<double>& {
        auto it = continuation->find(counts);
        if (it != continuation->end()) return it->second;
        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<std::size_t>(F));
        for (int f = 0; f < F; ++f)
          rows.push_back(p_hat(h, f, s[static_cast<std::size_t>(f)],
                               counts[static_cast<std::size_t>(f)]));
        std::vector<double> cont(static_cast<std::size_t>(m), 0.0);
        for_each_next_state(rows, strides, [&](long long nidx, double prob) {
          const std::vector<double>& v = next_values[static_cast<std::size_t>(nidx)];
          for (int i = 0; i < m; ++i) cont[static_cast<std::size_t>(i)] += prob * v[static_cast<std::size_t>(i)];
        });
        return continuation->emplace(counts, std::move(cont)).first->second;
      };

      StagePayoffOracle oracle;
      oracle.num_players = m;
      oracle.action_counts = spec.action_counts();
      oracle.r_max = hf;
      oracle.payoff = [&](int player, const DeterministicProfile& profile) {
        const CountProfile counts = counts_of(spec, profile);
        const double q = stage_value(h, s, profile, player) +
                         lookup(counts)[static_cast<std::size_t>(player)];
        return std::clamp(q, 0.0, hf);
      };

      DeterministicProfile start(static_cast<std::size_t>(m), 0);
      if (warm_start && static_cast<std::size_t>(h) < warm_start->size() &&
          !(*warm_start)[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)].empty())
        start = (*warm_start)[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)];

      const GreedyResult stage = eps_nash_greedy(oracle, eps, start);
      result.stage_rounds += stage.rounds_used;
      result.converged = result.converged && stage.converged;
      result.policies[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)] =
          stage.profile;
      for (int i = 0; i < m; ++i)
        result.values[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)]
                     [static_cast<std::size_t>(i)] = oracle.payoff(i, stage.profile);
    }
  }

  auto values = std::make_shared<std::vector<std::vector<std::vector<double>>>>(result.values);
  const ImcgSpec* spec_ptr = &spec;
  result.qbar = [spec_ptr, stage_value, p_hat, values, strides, hf, F, m](
                    int h, const FactoredState& s, const DeterministicProfile& a, int player) {
    const CountProfile counts = counts_of(*spec_ptr, a);
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f)
      rows.push_back(
          p_hat(h, f, s[static_cast<std::size_t>(f)], counts[static_cast<std::size_t>(f)]));
    double cont = 0.0;
    const auto& next_values = (*values)[static_cast<std::size_t>(h) + 1];
    for_each_next_state(rows, strides, [&](long long nidx, double prob) {
      cont += prob * next_values[static_cast<std::size_t>(nidx)][static_cast<std::size_t>(player)];
    });
    (void)m;
    return std::clamp(stage_value(h, s, a, player) + cont, 0.0, hf);
  };
  return result;
}

double vi_iota(const ImcgSpec& spec, long long episodes, double delta) {
  const double T = static_cast<double>(std::max<long long>(episodes, 1)) *
                   static_cast<double>(spec.horizon);
  return 2.0 * std::log(4.0 * static_cast<double>(spec.num_players + 1) *
                        static_cast<double>(spec.total_facility_states()) * T / delta);
}

RegretTrace run_nash_vi(const ImcgSpec& spec, const ViConfig& cfg, std::uint64_t seed,
                        const ViObserver& observer) {
  spec.validate();
  if (cfg.feedback != spec.feedback)
    throw std::invalid_argument("config feedback mode must match the spec");
  if (spec.num_states() > 10000)
    throw std::invalid_argument("joint state space exceeds the 1e4 tabular guard");

  const int H = spec.horizon;
  const int m = spec.num_players;
  const int F = spec.num_facilities();
  const long long K = cfg.episodes;
  const double eps = cfg.eps_stage > 0.0
                         ? cfg.eps_stage
                         : 1.0 / static_cast<double>(std::max<long long>(K, 1) * H);
  const double iota = cfg.iota_override ? *cfg.iota_override : vi_iota(spec, K, cfg.delta);

  MarkovCounter counter(spec);
  const int ridge_dim = m * spec.total_facility_states();
  std::vector<int> slot_base(static_cast<std::size_t>(F), 0);
  for (int f = 1; f < F; ++f)
    slot_base[static_cast<std::size_t>(f)] =
        slot_base[static_cast<std::size_t>(f) - 1] +
        m * spec.facilities[static_cast<std::size_t>(f) - 1].S;
  std::vector<RidgeState> ridges;
  if (cfg.feedback == Feedback::Bandit)
    ridges.assign(static_cast<std::size_t>(H), RidgeState(ridge_dim));

  Rng base(seed);
  RegretTrace trace;
  trace.seed = seed;
  MarkovPolicy warm;

  for (long long k = 1; k <= K; ++k) {
    const double sqrt_beta = ucb_sqrt_beta(ridge_dim, m, F, k, iota);

    StageValueFn stage_value;
    if (cfg.feedback == Feedback::SemiBandit) {
      stage_value = [&](int h, const FactoredState& s, const DeterministicProfile& a, int i) {
        const CountProfile counts = counts_of(spec, a);
        // Transition uncertainty is zero for single-state facilities.
        double q = pv_bonus_impl(counter, spec, h, s, counts, iota, true);
        for (int f : spec.action_sets[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                 a[static_cast<std::size_t>(i)])]) {
          const int sf = s[static_cast<std::size_t>(f)];
          const int n = counts[static_cast<std::size_t>(f)];
          const double visits =
              static_cast<double>(std::max<long long>(counter.visits(h, f, sf, n), 1));
          q += counter.mean_reward(h, f, sf, n) + std::sqrt(iota / visits);
        }
        return q;
      };
    } else {
      stage_value = [&, sqrt_beta](int h, const FactoredState& s, const DeterministicProfile& a,
                                   int i) {
        const CountProfile counts = counts_of(spec, a);
        const RidgeState& ridge = ridges[static_cast<std::size_t>(h)];
        double bonus_sq = 0.0;
        for (int j = 0; j < m; ++j)
          bonus_sq = std::max(
              bonus_sq, ridge.inv_quadratic(markov_feature_slots(spec, slot_base, s, a, counts, j)));
        return ridge.theta_dot(markov_feature_slots(spec, slot_base, s, a, counts, i)) +
               std::sqrt(bonus_sq) * sqrt_beta +
               pv_bonus_impl(counter, spec, h, s, counts, iota, true);
      };
    }
    TransitionRowFn p_hat = [&](int h, int f, int sf, int n) {
      return counter.p_hat_row(h, f, sf, n);
    };

    PlanResult plan = nash_vi_plan(spec, stage_value, p_hat, eps, warm.empty() ? nullptr : &warm);
    const EpisodeLog log = imcg_rollout(spec, plan.policies, base, static_cast<std::uint64_t>(k));
    if (observer) observer(k, plan, log);

    std::vector<double> episode_rewards(static_cast<std::size_t>(m), 0.0);
    for (int h = 0; h < H; ++h) {
      const ImcgStep& step = log[static_cast<std::size_t>(h)];
      const CountProfile counts = counts_of(spec, step.action);
      for (int f = 0; f < F; ++f) {
        const int sf = step.state[static_cast<std::size_t>(f)];
        const int n = counts[static_cast<std::size_t>(f)];
        counter.record_visit(h, f, sf, n);
        if (cfg.feedback == Feedback::SemiBandit && n >= 1)
          counter.record_reward(h, f, sf, n, step.realized[static_cast<std::size_t>(f)]);
        if (h + 1 < H)
          counter.record_transition(h, f, sf, n,
                                    log[static_cast<std::size_t>(h) + 1]
                                        .state[static_cast<std::size_t>(f)]);
      }
      for (int i = 0; i < m; ++i) {
        const double total = step.observations[static_cast<std::size_t>(i)].total;
        episode_rewards[static_cast<std::size_t>(i)] += total;
        if (cfg.feedback == Feedback::Bandit)
          ridges[static_cast<std::size_t>(h)].update(
              markov_feature_slots(spec, slot_base, step.state, step.action, counts, i), total);
      }
    }

    TraceRow row;
    row.episode = k;
    row.gap = markov_nash_gap(spec, plan.policies);
    row.cum_regret = (trace.rows.empty() ? 0.0 : trace.rows.back().cum_regret) + row.gap;
    row.player_rewards = std::move(episode_rewards);
    row.stage_rounds = static_cast<int>(std::min<long long>(plan.stage_rounds, 1000000000));
    row.converged = plan.converged;
    trace.rows.push_back(std::move(row));
    warm = std::move(plan.policies);
  }
  return trace;
}

double markov_nash_gap(const ImcgSpec& spec, const MarkovPolicy& policies) {
  const int H = spec.horizon;
  const int m = spec.num_players;
  const int F = spec.num_facilities();
  const long long num_states = spec.num_states();
  if (num_states > 10000)
    throw std::invalid_argument("joint state space exceeds the 1e4 tabular guard");
  const std::vector<long long> strides = state_strides(spec);

  const auto profile_at = [&](int h, long long sidx) -> const DeterministicProfile& {
    if (static_cast<std::size_t>(h) >= policies.size() ||
        static_cast<std::size_t>(sidx) >= policies[static_cast<std::size_t>(h)].size() ||
        policies[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)].empty())
      throw std::invalid_argument("no policy for step " + std::to_string(h) + ", state " +
                                  std::to_string(sidx));
    return policies[static_cast<std::size_t>(h)][static_cast<std::size_t>(sidx)];
  };

  const auto mean_reward = [&](int h, const FactoredState& s, const CountProfile& counts,
                               const DeterministicProfile& profile, int i) {
    double r = 0.0;
    for (int f : spec.action_sets[static_cast<std::size_t>(i)][static_cast<std::size_t>(
             profile[static_cast<std::size_t>(i)])])
      r += spec.facilities[static_cast<std::size_t>(f)]
               .rewards[static_cast<std::size_t>(h)][static_cast<std::size_t>(
                   s[static_cast<std::size_t>(f)])]
                       [static_cast<std::size_t>(counts[static_cast<std::size_t>(f)]) - 1];
    return r;
  };

  const auto continuation = [&](int h, const FactoredState& s, const CountProfile& counts,
                                const std::vector<double>& next) {
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f)
      rows.push_back(spec.facilities[static_cast<std::size_t>(f)]
                         .transitions[static_cast<std::size_t>(h)][static_cast<std::size_t>(
                             s[static_cast<std::size_t>(f)])]
                                     [static_cast<std::size_t>(counts[static_cast<std::size_t>(f)])]);
    double value = 0.0;
    for_each_next_state(rows, strides,
                        [&](long long nidx, double prob) { value += prob * next[static_cast<std::size_t>(nidx)]; });
    return value;
  };

  // Policy values, one table per player.
  std::vector<std::vector<double>> v_pi(static_cast<std::size_t>(m),
                                        std::vector<double>(static_cast<std::size_t>(num_states), 0.0));
  // Best-response values per player.
  std::vector<std::vector<double>> v_br = v_pi;

  for (int h = H - 1; h >= 0; --h) {
    std::vector<std::vector<double>> v_pi_next = v_pi;
    std::vector<std::vector<double>> v_br_next = v_br;
    for (long long sidx = 0; sidx < num_states; ++sidx) {
      const FactoredState s = spec.decode_state(sidx);
      const DeterministicProfile& profile = profile_at(h, sidx);
      const CountProfile counts = counts_of(spec, profile);
      for (int i = 0; i < m; ++i) {
        v_pi[static_cast<std::size_t>(i)][static_cast<std::size_t>(sidx)] =
            mean_reward(h, s, counts, profile, i) +
            continuation(h, s, counts, v_pi_next[static_cast<std::size_t>(i)]);

        double best = -std::numeric_limits<double>::infinity();
        DeterministicProfile deviated = profile;
        for (std::size_t a = 0; a < spec.action_sets[static_cast<std::size_t>(i)].size(); ++a) {
          deviated[static_cast<std::size_t>(i)] = static_cast<int>(a);
          const CountProfile dev_counts = counts_of(spec, deviated);
          const double q = mean_reward(h, s, dev_counts, deviated, i) +
                           continuation(h, s, dev_counts, v_br_next[static_cast<std::size_t>(i)]);
          best = std::max(best, q);
        }
        v_br[static_cast<std::size_t>(i)][static_cast<std::size_t>(sidx)] = best;
      }
    }
  }

  const long long start = spec.encode_state(spec.initial_state);
  double gap = 0.0;
  for (int i = 0; i < m; ++i)
    gap = std::max(gap, v_br[static_cast<std::size_t>(i)][static_cast<std::size_t>(start)] -
                            v_pi[static_cast<std::size_t>(i)][static_cast<std::size_t>(start)]);
  if (gap < 0.0 && gap > -1e-9) gap = 0.0;
  return gap;
}

}  // namespace congestion
