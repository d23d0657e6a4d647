#pragma once

#include <stdexcept>
#include <string>

#include "edpc/model.hpp"
#include "edpc/scenario.hpp"

// Human-readable JSON for game specs and scenario configs. Field names carry
// units; doubles round-trip exactly.

namespace edpc {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

std::string to_json(const GameSpec& spec);
std::string to_json(const ScenarioConfig& config);

// Both throw ParseError naming the offending field; the loaded spec/config is
// validated before being returned.
GameSpec game_from_json(const std::string& text);
ScenarioConfig config_from_json(const std::string& text);

void save_text(const std::string& path, const std::string& text);
std::string load_text(const std::string& path);

}  // namespace edpc
