#pragma once

#include <string>

#include "json.hpp"

#include "cbctforge/affine.hpp"
#include "cbctforge/compose.hpp"
#include "cbctforge/osart.hpp"
#include "cbctforge/plahe.hpp"
#include "cbctforge/projector.hpp"
#include "cbctforge/volume.hpp"

namespace cbctforge {

// JSON bindings for every user-facing config struct. Parsers reject unknown
// keys, fill omitted fields from the struct defaults, and run the struct's
// validate() before returning.

nlohmann::json to_json(const PlaheParams& p);
PlaheParams plahe_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AffineSpec& a);
AffineSpec affine_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ConeBeamGeometry& g);
ConeBeamGeometry geometry_from_json(const nlohmann::json& j);

nlohmann::json to_json(const OsartConfig& c);
OsartConfig osart_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Grid3& g);
Grid3 grid_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

nlohmann::json load_json_file(const std::string& path);
PipelineConfig load_pipeline_config(const std::string& path);

// JSON schema (draft-07) of the pipeline config document.
const char* config_schema();

inline constexpr const char* kConfigSchemaVersion = "1";

}  // namespace cbctforge
