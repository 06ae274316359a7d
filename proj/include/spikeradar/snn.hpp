#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikeradar/encoding.hpp"
#include "spikeradar/quantizer.hpp"

namespace spikeradar::snn {

// compare_then_integrate is the default: the spike is decided on the
// potential carried into the step, and the step's input is discarded when
// the neuron fires. integrate_then_fire adds the input first (ablation only).
enum class NeuronMode { compare_then_integrate, integrate_then_fire };

const char* neuron_mode_name(NeuronMode mode);
NeuronMode parse_neuron_mode(const std::string& name);

// Updates one neuron in place and reports whether it fired. Potentials that
// would go negative are clamped to 0.
inline bool if_update(double& v, double drive, NeuronMode mode) {
  if (mode == NeuronMode::compare_then_integrate) {
    if (v >= 1.0) {
      v = 0.0;
      return true;
    }
    const double u = v + drive;
    v = u > 0.0 ? u : 0.0;
    return false;
  }
  const double u = v + drive;
  if (u >= 1.0) {
    v = 0.0;
    return true;
  }
  v = u > 0.0 ? u : 0.0;
  return false;
}

struct IfState {
  std::vector<double> v;
};

struct IfStepResult {
  IfState next;
  std::vector<std::uint8_t> spikes;
};

IfStepResult if_step(const IfState& state, std::span<const double> drive,
                     NeuronMode mode = NeuronMode::compare_then_integrate);

struct Shape3 {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const { return channels * height * width; }
  bool operator==(const Shape3&) const = default;
};

enum class LayerKind { conv2d, maxpool, flatten, dense, accumulator };

const char* layer_kind_name(LayerKind kind);
LayerKind parse_layer_kind(const std::string& name);

// conv2d and dense layers carry IF neurons on their outputs. Activations use
// (height, width, channel) order, which is also the flatten order.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  // conv2d; stride 1 and no padding are the only supported values.
  std::size_t kernel_h = 5;
  std::size_t kernel_w = 5;
  std::size_t out_channels = 12;
  std::size_t stride = 1;
  std::size_t padding = 0;
  // maxpool
  std::size_t pool = 2;
  std::size_t pool_stride = 2;
  // dense
  std::size_t in_features = 0;
  std::size_t out_features = 0;

  // Filled by resolve_shapes.
  Shape3 in_shape;
  Shape3 out_shape;

  bool spiking() const { return kind == LayerKind::conv2d || kind == LayerKind::dense; }
  std::size_t weight_count() const;
  std::size_t fan_in() const;
  std::size_t fan_out() const;
};

// Checks that the stack chains from the input shape to an accumulator and
// fills in per-layer shapes.
void resolve_shapes(std::vector<LayerSpec>& layers, Shape3 input);

struct ArchitectureConfig {
  Shape3 input{1, 48, 99};
  std::size_t conv_channels = 12;
  std::size_t kernel = 5;
  std::size_t pool = 2;
  std::size_t hidden = 128;
  std::size_t classes = 5;
};

// conv(k, k, C) -> maxpool -> flatten -> dense(hidden) -> dense(classes) -> accumulator
std::vector<LayerSpec> build_architecture(const ArchitectureConfig& cfg);

struct QuantizedView {
  int bits = 0;
  std::vector<quant::QuantizedTensor> tensors;    // per layer, empty when non-parametric
  std::vector<std::vector<double>> dequantized;   // per layer
};

// Weight layouts: conv [kh][kw][c_in][c_out], dense [in][out]. No biases.
struct SnnModel {
  Shape3 input_shape;
  std::vector<LayerSpec> layers;
  std::vector<std::vector<double>> weights;
  std::optional<QuantizedView> quantized;
  std::size_t t_inf = 4;
  NeuronMode neuron_mode = NeuronMode::compare_then_integrate;

  std::size_t num_classes() const;
  std::size_t parameter_count() const;
  std::size_t spiking_layer_count() const;
  const std::vector<double>& layer_weights(std::size_t layer, bool use_quantized) const;
};

SnnModel make_model(const ArchitectureConfig& cfg, std::size_t t_inf,
                    NeuronMode mode = NeuronMode::compare_then_integrate);

inline constexpr double kDefaultInitGain = 6.0;

// Uniform in +-gain * sqrt(6 / (fan_in + fan_out)) per layer. With gain 1
// this is Glorot-uniform, which leaves a unit-threshold network silent.
void initialize_weights(SnnModel& model, std::uint64_t seed, double gain = kDefaultInitGain);

// Rebuilds the quantized view from the current full-precision weights.
void quantize_model(SnnModel& model, int bits);

struct ForwardTrace {
  std::vector<double> accumulator;
  std::size_t input_spikes = 0;
  std::vector<std::size_t> layer_spikes;  // one entry per spiking layer
  std::size_t total_spikes = 0;           // input + all IF layers
  // [step][0 = input, 1.. = spiking layers]; filled only on request.
  std::vector<std::vector<std::size_t>> per_step_spikes;
};

struct ForwardResult {
  std::vector<double> probabilities;
  ForwardTrace trace;
};

// IF states start at zero for every call.
ForwardResult forward(const SnnModel& model, const encoding::SpikeTensor& input,
                      bool use_quantized, bool record_steps = false);

std::vector<double> softmax(std::span<const double> logits);
std::size_t argmax(std::span<const double> values);  // lowest index on ties

struct PoolResult {
  std::size_t out_height = 0;
  std::size_t out_width = 0;
  std::vector<std::uint8_t> spikes;
  std::vector<std::size_t> argmax;  // source index per output, first index wins
};

// OR over each window of an (height, width, channel) spike map; trailing
// rows/columns that do not fill a window are dropped.
PoolResult maxpool_spikes(std::span<const std::uint8_t> spikes, std::size_t height,
                          std::size_t width, std::size_t channels = 1,
                          std::size_t window = 2, std::size_t stride = 2);

// ---------------------------------------------------------------------------
// Layer-major execution with the internals needed for backpropagation.

enum class SpikeFunction { hard, relaxed };

struct LayerActivity {
  std::vector<double> drive;         // [T][N], spiking layers
  std::vector<double> v_pre;         // [T][N] potential the spike is decided on
  std::vector<std::uint8_t> fired;   // [T][N]
  std::vector<double> out;           // [T][N_out]
  std::vector<std::uint32_t> route;  // [T][N_out], maxpool source index
};

struct NetworkActivity {
  std::size_t t_inf = 0;
  std::vector<double> input;  // [T][H][W][C]
  std::vector<LayerActivity> layers;
  std::vector<double> accumulator;
};

// Converts a (time, channel, height, width) tensor into [T][H][W][C] values.
std::vector<double> input_activity(const SnnModel& model, const encoding::SpikeTensor& input);

NetworkActivity run_network(const SnnModel& model, const encoding::SpikeTensor& input,
                            bool use_quantized, SpikeFunction fn = SpikeFunction::hard);

}  // namespace spikeradar::snn
