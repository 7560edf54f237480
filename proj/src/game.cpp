#include "congestion/game.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace congestion {

namespace {
constexpr double kGapClip = 1e-9;
}

ProductPolicy ProductPolicy::uniform(const std::vector<std::size_t>& action_counts) {
  ProductPolicy pi;
  pi.probs.reserve(action_counts.size());
  for (std::size_t n : action_counts)
    pi.probs.emplace_back(n, 1.0 / static_cast<double>(n));
  return pi;
}

ProductPolicy ProductPolicy::deterministic(const JointAction& a,
                                           const std::vector<std::size_t>& action_counts) {
  ProductPolicy pi;
  pi.probs.reserve(action_counts.size());
  for (std::size_t i = 0; i < action_counts.size(); ++i) {
    std::vector<double> row(action_counts[i], 0.0);
    row.at(static_cast<std::size_t>(a[i])) = 1.0;
    pi.probs.push_back(std::move(row));
  }
  return pi;
}

CongestionGame::CongestionGame(int num_players, int num_facilities,
                               std::vector<std::vector<Action>> action_sets,
                               std::vector<std::vector<double>> reward_table,
                               NoiseModel noise, Feedback feedback)
    : m_(num_players),
      F_(num_facilities),
      action_sets_(std::move(action_sets)),
      rewards_(std::move(reward_table)),
      noise_(noise),
      feedback_(feedback) {
  if (m_ < 1) throw std::invalid_argument("player count must be >= 1");
  if (F_ < 1) throw std::invalid_argument("facility count must be >= 1");
  if (action_sets_.size() != static_cast<std::size_t>(m_))
    throw std::invalid_argument("action_sets size must equal player count");
  if (rewards_.size() != static_cast<std::size_t>(F_))
    throw std::invalid_argument("reward table must have one row per facility");
  for (const auto& row : rewards_) {
    if (row.size() != static_cast<std::size_t>(m_))
      throw std::invalid_argument("reward row must have m columns");
    for (double r : row)
      if (r < 0.0 || r > 1.0) throw std::invalid_argument("rewards must lie in [0,1]");
  }
  for (int i = 0; i < m_; ++i) {
    const auto& acts = action_sets_[i];
    if (acts.empty())
      throw std::invalid_argument("player " + std::to_string(i) + " has an empty action list");
    std::set<Action> seen;
    for (const auto& a : acts) {
      std::set<int> facs(a.begin(), a.end());
      if (facs.size() != a.size())
        throw std::invalid_argument("action contains a duplicate facility");
      for (int f : a)
        if (f < 0 || f >= F_) throw std::invalid_argument("facility id out of range");
      Action sorted(facs.begin(), facs.end());
      if (!seen.insert(sorted).second)
        throw std::invalid_argument("player " + std::to_string(i) +
                                    " lists the same facility subset twice");
    }
  }
}

std::vector<std::size_t> CongestionGame::action_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) counts[static_cast<std::size_t>(i)] = action_sets_[i].size();
  return counts;
}

void CongestionGame::validate_joint_action(const JointAction& a) const {
  if (a.size() != static_cast<std::size_t>(m_))
    throw std::invalid_argument("joint action must have one index per player");
  for (int i = 0; i < m_; ++i)
    if (a[i] < 0 || static_cast<std::size_t>(a[i]) >= action_sets_[i].size())
      throw std::invalid_argument("invalid action index for player " + std::to_string(i));
}

void CongestionGame::validate_policy(const ProductPolicy& pi) const {
  if (pi.probs.size() != static_cast<std::size_t>(m_))
    throw std::invalid_argument("policy must have one vector per player");
  for (int i = 0; i < m_; ++i) {
    const auto& row = pi.probs[i];
    if (row.size() != action_sets_[i].size())
      throw std::invalid_argument("policy row size mismatch for player " + std::to_string(i));
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0) throw std::invalid_argument("policy entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("policy row must sum to 1");
  }
}

CountProfile CongestionGame::count_profile(const JointAction& a) const {
  validate_joint_action(a);
  CountProfile counts(static_cast<std::size_t>(F_), 0);
  for (int i = 0; i < m_; ++i)
    for (int f : action_sets_[i][static_cast<std::size_t>(a[i])]) ++counts[static_cast<std::size_t>(f)];
  return counts;
}

double CongestionGame::realized_facility_reward(int facility, int count, Rng& rng) const {
  const double mean = mean_reward(facility, count);
  switch (noise_.kind) {
    case NoiseKind::Bernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case NoiseKind::TruncatedGaussian: {
      // Symmetric truncation around the mean keeps E[draw] = mean exactly.
      const double half_width = std::min(mean, 1.0 - mean);
      if (half_width <= 0.0) return mean;
      for (;;) {
        const double draw = mean + noise_.sigma * rng.normal();
        if (std::abs(draw - mean) <= half_width) return draw;
      }
    }
  }
  return mean;
}

std::pair<std::vector<Observation>, std::vector<double>> CongestionGame::sample_round(
    const JointAction& a, Rng& rng) const {
  const CountProfile counts = count_profile(a);
  std::vector<double> realized(static_cast<std::size_t>(F_), -1.0);
  for (int f = 0; f < F_; ++f)
    if (counts[static_cast<std::size_t>(f)] >= 1)
      realized[static_cast<std::size_t>(f)] =
          realized_facility_reward(f, counts[static_cast<std::size_t>(f)], rng);

  std::vector<Observation> obs(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) {
    Observation& o = obs[static_cast<std::size_t>(i)];
    for (int f : action_sets_[i][static_cast<std::size_t>(a[i])]) {
      const double r = realized[static_cast<std::size_t>(f)];
      o.total += r;
      if (feedback_ == Feedback::SemiBandit) o.facility_rewards.emplace_back(f, r);
    }
  }
  return {std::move(obs), std::move(realized)};
}

double CongestionGame::potential_value(const JointAction& a) const {
  const CountProfile counts = count_profile(a);
  double phi = 0.0;
  for (int f = 0; f < F_; ++f)
    for (int n = 1; n <= counts[static_cast<std::size_t>(f)]; ++n) phi += mean_reward(f, n);
  return phi;
}

double CongestionGame::player_reward(int player, const JointAction& a) const {
  const CountProfile counts = count_profile(a);
  double r = 0.0;
  for (int f : action_sets_[player][static_cast<std::size_t>(a[player])])
    r += mean_reward(f, counts[static_cast<std::size_t>(f)]);
  return r;
}

std::vector<double> poisson_binomial_pmf(const std::vector<double>& p) {
  std::vector<double> pmf{1.0};
  pmf.reserve(p.size() + 1);
  for (double pj : p) {
    pmf.push_back(0.0);
    for (std::size_t n = pmf.size() - 1; n > 0; --n)
      pmf[n] = pmf[n] * (1.0 - pj) + pmf[n - 1] * pj;
    pmf[0] *= (1.0 - pj);
  }
  return pmf;
}

std::vector<double> CongestionGame::facility_load_vector(const ProductPolicy& pi,
                                                         int player) const {
  validate_policy(pi);
  std::vector<double> theta(static_cast<std::size_t>(F_), 0.0);
  for (int f = 0; f < F_; ++f) {
    std::vector<double> inclusion;
    inclusion.reserve(static_cast<std::size_t>(m_ - 1));
    for (int j = 0; j < m_; ++j) {
      if (j == player) continue;
      double pj = 0.0;
      for (std::size_t idx = 0; idx < action_sets_[j].size(); ++idx)
        if (std::find(action_sets_[j][idx].begin(), action_sets_[j][idx].end(), f) !=
            action_sets_[j][idx].end())
          pj += pi.probs[j][idx];
      inclusion.push_back(pj);
    }
    const std::vector<double> pmf = poisson_binomial_pmf(inclusion);
    double value = 0.0;
    for (std::size_t n = 0; n < pmf.size(); ++n)
      value += pmf[n] * mean_reward(f, static_cast<int>(n) + 1);
    theta[static_cast<std::size_t>(f)] = value;
  }
  return theta;
}

double CongestionGame::expected_value(const ProductPolicy& pi, int player) const {
  const std::vector<double> theta = facility_load_vector(pi, player);
  double value = 0.0;
  for (std::size_t idx = 0; idx < action_sets_[player].size(); ++idx) {
    double dot = 0.0;
    for (int f : action_sets_[player][idx]) dot += theta[static_cast<std::size_t>(f)];
    value += pi.probs[player][idx] * dot;
  }
  return value;
}

std::pair<int, double> CongestionGame::best_response(const ProductPolicy& pi,
                                                     int player) const {
  const std::vector<double> theta = facility_load_vector(pi, player);
  int best = 0;
  double best_value = -1.0;
  for (std::size_t idx = 0; idx < action_sets_[player].size(); ++idx) {
    double dot = 0.0;
    for (int f : action_sets_[player][idx]) dot += theta[static_cast<std::size_t>(f)];
    if (dot > best_value) {
      best_value = dot;
      best = static_cast<int>(idx);
    }
  }
  return {best, best_value};
}

double CongestionGame::nash_gap(const ProductPolicy& pi) const {
  validate_policy(pi);
  double gap = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double br = best_response(pi, i).second;
    gap = std::max(gap, br - expected_value(pi, i));
  }
  if (gap < 0.0 && gap >= -kGapClip) gap = 0.0;
  return gap;
}

}  // namespace congestion
