#pragma once

#include <filesystem>

#include <json.hpp>

#include "spikeradar/snn.hpp"

namespace spikeradar::model_io {

inline constexpr int kModelSchemaVersion = 1;

// A model directory holds manifest.json, layer_<i>_weights.f64 for every
// parametric layer and, when quantized, layer_<i>_codes.i8. `info` is stored
// verbatim under the manifest's "info" key.
void save_model(const std::filesystem::path& dir, const snn::SnnModel& model,
                const nlohmann::json& info = nlohmann::json::object());

snn::SnnModel load_model(const std::filesystem::path& dir);

nlohmann::json read_model_manifest(const std::filesystem::path& dir);

nlohmann::json layer_to_json(const snn::LayerSpec& layer);
snn::LayerSpec layer_from_json(const nlohmann::json& j);

}  // namespace spikeradar::model_io
