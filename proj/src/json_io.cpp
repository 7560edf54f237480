#include "congestion/json_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace congestion {

namespace {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

json noise_to_json_impl(const NoiseModel& noise) {
  json j;
  j["kind"] = noise.kind == NoiseKind::Bernoulli ? "bernoulli" : "trunc_gauss";
  if (noise.kind == NoiseKind::TruncatedGaussian) j["sigma"] = noise.sigma;
  return j;
}

NoiseModel noise_from_json(const json& j) {
  NoiseModel noise;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") {
    noise.kind = NoiseKind::Bernoulli;
  } else if (kind == "trunc_gauss") {
    noise.kind = NoiseKind::TruncatedGaussian;
    if (j.contains("sigma")) noise.sigma = j.at("sigma").get<double>();
  } else {
    throw std::invalid_argument("noise.kind must be \"bernoulli\" or \"trunc_gauss\"");
  }
  return noise;
}

Feedback feedback_from_json(const json& j) {
  const std::string mode = j.at("feedback").get<std::string>();
  if (mode == "semi") return Feedback::SemiBandit;
  if (mode == "bandit") return Feedback::Bandit;
  throw std::invalid_argument("feedback must be \"semi\" or \"bandit\"");
}

const char* feedback_name(Feedback f) { return f == Feedback::SemiBandit ? "semi" : "bandit"; }

}  // namespace

std::string game_to_json(const CongestionGame& game) {
  ordered j;
  j["m"] = game.num_players();
  j["F"] = game.num_facilities();
  ordered actions = ordered::array();
  for (int i = 0; i < game.num_players(); ++i) actions.push_back(game.actions(i));
  j["actions"] = std::move(actions);
  j["rewards"] = game.reward_table();
  j["noise"] = noise_to_json_impl(game.noise());
  j["feedback"] = feedback_name(game.feedback());
  return j.dump(2) + "\n";
}

CongestionGame game_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int m = j.at("m").get<int>();
  const int F = j.at("F").get<int>();
  auto actions = j.at("actions").get<std::vector<std::vector<Action>>>();
  auto rewards = j.at("rewards").get<std::vector<std::vector<double>>>();
  const NoiseModel noise = noise_from_json(j.at("noise"));
  const Feedback feedback = feedback_from_json(j);
  return CongestionGame(m, F, std::move(actions), std::move(rewards), noise, feedback);
}

std::string imcg_to_json(const ImcgSpec& spec) {
  ordered j;
  j["H"] = spec.horizon;
  ordered facilities = ordered::array();
  for (const FacilityDynamics& fac : spec.facilities) {
    ordered f;
    f["S"] = fac.S;
    f["P"] = fac.transitions;
    f["r"] = fac.rewards;
    facilities.push_back(std::move(f));
  }
  j["facilities"] = std::move(facilities);
  j["m"] = spec.num_players;
  j["actions"] = spec.action_sets;
  j["s1"] = spec.initial_state;
  j["noise"] = noise_to_json_impl(spec.noise);
  j["feedback"] = feedback_name(spec.feedback);
  return j.dump(2) + "\n";
}

ImcgSpec imcg_from_json(const std::string& text) {
  const json j = json::parse(text);
  ImcgSpec spec;
  spec.horizon = j.at("H").get<int>();
  for (const json& f : j.at("facilities")) {
    FacilityDynamics fac;
    fac.S = f.at("S").get<int>();
    fac.transitions =
        f.at("P").get<std::vector<std::vector<std::vector<std::vector<double>>>>>();
    fac.rewards = f.at("r").get<std::vector<std::vector<std::vector<double>>>>();
    spec.facilities.push_back(std::move(fac));
  }
  spec.num_players = j.at("m").get<int>();
  spec.action_sets = j.at("actions").get<std::vector<std::vector<Action>>>();
  spec.initial_state = j.at("s1").get<FactoredState>();
  spec.noise = noise_from_json(j.at("noise"));
  spec.feedback = feedback_from_json(j);
  spec.validate();
  return spec;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace congestion
