#pragma once

#include <string>

#include "json.hpp"
#include "smartwrite/device_model.hpp"

namespace smartwrite {

// JSON section parsers shared by the config loader. Each rejects unknown keys
// and prefixes validation errors with `path` so failures name the exact field.
DeviceConfig device_config_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json device_config_to_json(const DeviceConfig& cfg);

}  // namespace smartwrite
