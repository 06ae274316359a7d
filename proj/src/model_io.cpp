#include "spikeradar/model_io.hpp"

#include <fstream>
#include <string>

#include "spikeradar/container.hpp"
#include "spikeradar/error.hpp"

namespace spikeradar::model_io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json shape_to_json(const snn::Shape3& s) { return json::array({s.channels, s.height, s.width}); }

snn::Shape3 shape_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("input_shape must be [channels, height, width]");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

std::string weights_name(std::size_t i) { return "layer_" + std::to_string(i) + "_weights.f64"; }
std::string codes_name(std::size_t i) { return "layer_" + std::to_string(i) + "_codes.i8"; }

}  // namespace

json layer_to_json(const snn::LayerSpec& l) {
  json j;
  j["kind"] = snn::layer_kind_name(l.kind);
  switch (l.kind) {
    case snn::LayerKind::conv2d:
      j["kernel_h"] = l.kernel_h;
      j["kernel_w"] = l.kernel_w;
      j["out_channels"] = l.out_channels;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case snn::LayerKind::maxpool:
      j["pool"] = l.pool;
      j["pool_stride"] = l.pool_stride;
      break;
    case snn::LayerKind::dense:
      j["in_features"] = l.in_features;
      j["out_features"] = l.out_features;
      break;
    default:
      break;
  }
  return j;
}

snn::LayerSpec layer_from_json(const json& j) {
  snn::LayerSpec l;
  l.kind = snn::parse_layer_kind(j.at("kind").get<std::string>());
  l.kernel_h = j.value("kernel_h", l.kernel_h);
  l.kernel_w = j.value("kernel_w", l.kernel_w);
  l.out_channels = j.value("out_channels", l.out_channels);
  l.stride = j.value("stride", l.stride);
  l.padding = j.value("padding", l.padding);
  l.pool = j.value("pool", l.pool);
  l.pool_stride = j.value("pool_stride", l.pool_stride);
  l.in_features = j.value("in_features", l.in_features);
  l.out_features = j.value("out_features", l.out_features);
  return l;
}

void save_model(const fs::path& dir, const snn::SnnModel& model, const json& info) {
  fs::create_directories(dir);
  json m;
  m["format"] = "spikeradar-model";
  m["schema_version"] = kModelSchemaVersion;
  m["t_inf"] = model.t_inf;
  m["neuron_mode"] = snn::neuron_mode_name(model.neuron_mode);
  m["input_shape"] = shape_to_json(model.input_shape);
  m["layers"] = json::array();
  for (const auto& l : model.layers) m["layers"].push_back(layer_to_json(l));
  m["info"] = info;

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (model.weights[i].empty()) continue;
    io::write_file(dir / weights_name(i),
                   io::make_real({model.weights[i].size()}, {"weight"}, model.weights[i],
                                 io::DType::f64));
  }
  if (model.quantized) {
    json q;
    q["bits"] = model.quantized->bits;
    q["scales"] = json::array();
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      const auto& t = model.quantized->tensors[i];
      if (t.codes.empty()) {
        q["scales"].push_back(nullptr);
        continue;
      }
      q["scales"].push_back(t.scale);
      io::write_file(dir / codes_name(i), io::make_codes({t.codes.size()}, {"weight"}, t.codes));
    }
    m["quantization"] = q;
  } else {
    m["quantization"] = nullptr;
  }
  io::write_bytes(dir / "manifest.json", m.dump(2) + "\n");
}

json read_model_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  if (!fs::exists(p)) throw InvalidInput("no model manifest at " + p.string());
  try {
    return json::parse(io::read_bytes(p));
  } catch (const json::exception& e) {
    throw InvalidInput("malformed model manifest " + p.string() + ": " + e.what());
  }
}

snn::SnnModel load_model(const fs::path& dir) {
  const json m = read_model_manifest(dir);
  snn::SnnModel model;
  try {
    if (m.at("schema_version").get<int>() != kModelSchemaVersion) {
      throw InvalidInput("unsupported model schema version");
    }
    model.t_inf = m.at("t_inf").get<std::size_t>();
    model.neuron_mode = snn::parse_neuron_mode(m.at("neuron_mode").get<std::string>());
    model.input_shape = shape_from_json(m.at("input_shape"));
    for (const auto& l : m.at("layers")) model.layers.push_back(layer_from_json(l));
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model manifest: ") + e.what());
  }
  snn::resolve_shapes(model.layers, model.input_shape);

  model.weights.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const std::size_t n = model.layers[i].weight_count();
    if (n == 0) continue;
    const auto t = io::read_file(dir / weights_name(i));
    if (t.real.size() != n) {
      throw InvalidInput("layer " + std::to_string(i) + " expects " + std::to_string(n) +
                         " weights, file has " + std::to_string(t.real.size()));
    }
    model.weights[i] = t.real;
  }

  const json& q = m.contains("quantization") ? m["quantization"] : json();
  if (!q.is_null()) {
    snn::QuantizedView view;
    view.bits = q.at("bits").get<int>();
    view.tensors.resize(model.layers.size());
    view.dequantized.resize(model.layers.size());
    const json& scales = q.at("scales");
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      if (model.weights[i].empty()) continue;
      const auto t = io::read_file(dir / codes_name(i));
      if (t.codes.size() != model.weights[i].size()) {
        throw InvalidInput("layer " + std::to_string(i) + " code count mismatch");
      }
      auto& qt = view.tensors[i];
      qt.codes = t.codes;
      qt.bits = view.bits;
      qt.scale = scales.at(i).get<double>();
      view.dequantized[i] = quant::dequantize(qt);
    }
    model.quantized = std::move(view);
  }
  return model;
}

}  // namespace spikeradar::model_io
