#include "congestion/trace.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <vector>

namespace congestion {

std::pair<double, long long> RegretTrace::best_iterate() const {
  double best = std::numeric_limits<double>::infinity();
  long long episode = 0;
  for (const TraceRow& row : rows) {
    if (row.gap < best) {
      best = row.gap;
      episode = row.episode;
    }
  }
  return {rows.empty() ? 0.0 : best, episode};
}

namespace {

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = std::strtod(buf, nullptr);
  if (parsed == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[64];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
  }
  return buf;
}

}  // namespace

std::string trace_to_csv(const RegretTrace& trace, int num_players) {
  std::ostringstream out;
  out << "k,gap,cum_regret,ms";
  for (int i = 1; i <= num_players; ++i) out << ",reward_p" << i;
  out << ",stage_rounds,converged\n";
  for (const TraceRow& row : trace.rows) {
    out << row.episode << ',' << format_double(row.gap) << ','
        << format_double(row.cum_regret) << ',' << row.ms;
    for (double r : row.player_rewards) out << ',' << format_double(r);
    out << ',' << row.stage_rounds << ',' << (row.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

TraceCheck verify_trace_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,gap,cum_regret,ms", 0) != 0)
    return {false, "missing or malformed header"};

  double prev_cum = 0.0;
  double multiplier = 0.0;  // inferred from the first row with a nonzero gap
  long long row_index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row_index;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> cols;
    while (std::getline(fields, field, ',')) cols.push_back(field);
    if (cols.size() < 6) return {false, "row " + std::to_string(row_index) + ": too few columns"};
    const double gap = std::strtod(cols[1].c_str(), nullptr);
    const double cum = std::strtod(cols[2].c_str(), nullptr);
    if (gap < 0.0)
      return {false, "row " + std::to_string(row_index) + ": negative gap"};
    const double delta = cum - prev_cum;
    if (multiplier == 0.0 && gap > 1e-15) multiplier = delta / gap;
    const double expected = (multiplier == 0.0 ? 0.0 : multiplier * gap);
    if (std::abs(delta - expected) > 1e-9)
      return {false, "row " + std::to_string(row_index) + ": cumulative column is not a prefix sum"};
    prev_cum = cum;
  }
  return {true, "ok"};
}

}  // namespace congestion
