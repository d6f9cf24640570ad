#pragma once

// EngineConfig as a JSON document. Unknown keys and out-of-range values are
// ConfigErrors; missing keys keep their defaults.

#include <filesystem>
#include <string>
#include <string_view>

#include "aoi/engine.hpp"

namespace aoi {

EngineConfig config_from_json(std::string_view text);
EngineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const EngineConfig& config);

}  // namespace aoi
