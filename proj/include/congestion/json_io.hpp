#pragma once

#include <string>

#include "congestion/game.hpp"
#include "congestion/imcg.hpp"

namespace congestion {

std::string game_to_json(const CongestionGame& game);
CongestionGame game_from_json(const std::string& text);

std::string imcg_to_json(const ImcgSpec& spec);
ImcgSpec imcg_from_json(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace congestion
