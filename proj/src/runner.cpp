#include "congestion/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "congestion/frank_wolfe.hpp"
#include "congestion/imcg.hpp"
#include "congestion/json_io.hpp"
#include "congestion/nash_ucb.hpp"
#include "congestion/trace.hpp"

namespace congestion {

namespace {

struct AlgorithmInfo {
  enum class Family { NashUcb, FrankWolfe, NashVi } family;
  Feedback feedback;
};

AlgorithmInfo algorithm_info(const std::string& name) {
  if (name == "nash-ucb-semi") return {AlgorithmInfo::Family::NashUcb, Feedback::SemiBandit};
  if (name == "nash-ucb-bandit") return {AlgorithmInfo::Family::NashUcb, Feedback::Bandit};
  if (name == "fw-semi") return {AlgorithmInfo::Family::FrankWolfe, Feedback::SemiBandit};
  if (name == "fw-bandit") return {AlgorithmInfo::Family::FrankWolfe, Feedback::Bandit};
  if (name == "nash-vi-semi") return {AlgorithmInfo::Family::NashVi, Feedback::SemiBandit};
  if (name == "nash-vi-bandit") return {AlgorithmInfo::Family::NashVi, Feedback::Bandit};
  throw std::invalid_argument("unknown algorithm \"" + name + "\"");
}

int thread_budget(std::size_t num_seeds) {
  int budget = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("CONGESTION_LAB_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) budget = parsed;
  }
  return std::min(budget, static_cast<int>(std::max<std::size_t>(num_seeds, 1)));
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.spec_path = j.at("spec_path").get<std::string>();
  cfg.algorithm = j.at("algorithm").get<std::string>();
  cfg.episodes = j.at("K").get<long long>();
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("eps_stage")) cfg.eps_stage = j.at("eps_stage").get<double>();
  if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
  if (j.contains("nu")) cfg.nu = j.at("nu").get<double>();
  if (j.contains("tau")) cfg.tau = j.at("tau").get<long long>();
  if (j.contains("design_tol")) cfg.design_tol = j.at("design_tol").get<double>();
  return cfg;
}

std::vector<SeedSummary> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.episodes < 1) throw std::invalid_argument("K must be >= 1");
  if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed required");
  const AlgorithmInfo info = algorithm_info(cfg.algorithm);
  const std::string spec_text = read_file(cfg.spec_path);

  std::function<RegretTrace(std::uint64_t)> run_seed;
  int num_players = 0;
  if (info.family == AlgorithmInfo::Family::NashVi) {
    auto spec = std::make_shared<ImcgSpec>(imcg_from_json(spec_text));
    if (spec->feedback != info.feedback)
      throw std::invalid_argument("algorithm \"" + cfg.algorithm +
                                  "\" does not match the spec's feedback mode");
    num_players = spec->num_players;
    ViConfig vi;
    vi.episodes = cfg.episodes;
    vi.feedback = info.feedback;
    if (cfg.delta) vi.delta = *cfg.delta;
    if (cfg.eps_stage) vi.eps_stage = *cfg.eps_stage;
    run_seed = [spec, vi](std::uint64_t seed) { return run_nash_vi(*spec, vi, seed); };
  } else {
    auto game = std::make_shared<CongestionGame>(game_from_json(spec_text));
    if (game->feedback() != info.feedback)
      throw std::invalid_argument("algorithm \"" + cfg.algorithm +
                                  "\" does not match the spec's feedback mode");
    num_players = game->num_players();
    if (info.family == AlgorithmInfo::Family::NashUcb) {
      UcbConfig ucb;
      ucb.episodes = cfg.episodes;
      ucb.feedback = info.feedback;
      if (cfg.delta) ucb.delta = *cfg.delta;
      if (cfg.eps_stage) ucb.eps_stage = *cfg.eps_stage;
      run_seed = [game, ucb](std::uint64_t seed) { return run_nash_ucb(*game, ucb, seed); };
    } else {
      FwConfig fw;
      fw.episodes = cfg.episodes;
      fw.feedback = info.feedback;
      if (cfg.gamma || cfg.nu || cfg.tau) {
        if (!(cfg.gamma && cfg.nu && cfg.tau))
          throw std::invalid_argument("manual schedules need gamma, nu and tau together");
        fw.schedule = FwSchedule::Manual;
        fw.gamma = *cfg.gamma;
        fw.nu = *cfg.nu;
        fw.rounds_per_episode = *cfg.tau;
      } else {
        fw.schedule = FwSchedule::TheoremDefault;
        if (cfg.episodes > 2154)  // K^3 rounds total
          std::fprintf(stderr,
                       "warning: default schedule plays K^3 = %lld rounds; consider a manual "
                       "gamma/nu/tau for quick runs\n",
                       cfg.episodes * cfg.episodes * cfg.episodes);
      }
      if (cfg.design_tol) fw.design_tol = *cfg.design_tol;
      run_seed = [game, fw](std::uint64_t seed) { return run_frank_wolfe(*game, fw, seed); };
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  std::vector<RegretTrace> traces(cfg.seeds.size());
  const int threads = thread_budget(cfg.seeds.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= cfg.seeds.size()) return;
      traces[idx] = run_seed(cfg.seeds[idx]);
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<SeedSummary> summaries;
  nlohmann::ordered_json summary;
  summary["algorithm"] = cfg.algorithm;
  summary["spec_path"] = cfg.spec_path;
  summary["K"] = cfg.episodes;
  summary["seeds"] = nlohmann::ordered_json::array();
  for (std::size_t idx = 0; idx < cfg.seeds.size(); ++idx) {
    const RegretTrace& trace = traces[idx];
    const auto [best_gap, best_episode] = trace.best_iterate();
    SeedSummary s{cfg.seeds[idx], trace.final_regret(), best_gap, best_episode};
    summaries.push_back(s);

    const std::string path = cfg.output_dir + "/trace_" + cfg.algorithm + "_" +
                             std::to_string(cfg.seeds[idx]) + ".csv";
    write_file(path, trace_to_csv(trace, num_players));

    nlohmann::ordered_json row;
    row["seed"] = s.seed;
    row["final_regret"] = s.final_regret;
    row["best_iterate_gap"] = s.best_iterate_gap;
    row["best_iterate_episode"] = s.best_iterate_episode;
    summary["seeds"].push_back(std::move(row));
  }
  write_file(cfg.output_dir + "/summary.json", summary.dump(2) + "\n");
  return summaries;
}

}  // namespace congestion
