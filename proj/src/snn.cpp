#include "spikeradar/snn.hpp"

#include <algorithm>
#include <cmath>

#include "spikeradar/error.hpp"
#include "spikeradar/random.hpp"
#include "spikeradar/surrogate.hpp"

namespace spikeradar::snn {

const char* neuron_mode_name(NeuronMode mode) {
  return mode == NeuronMode::compare_then_integrate ? "compare_then_integrate"
                                                    : "integrate_then_fire";
}

NeuronMode parse_neuron_mode(const std::string& name) {
  if (name == "compare_then_integrate") return NeuronMode::compare_then_integrate;
  if (name == "integrate_then_fire") return NeuronMode::integrate_then_fire;
  throw InvalidInput("unknown neuron mode '" + name + "'");
}

IfStepResult if_step(const IfState& state, std::span<const double> drive, NeuronMode mode) {
  if (state.v.size() != drive.size()) {
    throw InvalidInput("IF state has " + std::to_string(state.v.size()) +
                       " neurons but drive has " + std::to_string(drive.size()));
  }
  IfStepResult r;
  r.next = state;
  r.spikes.resize(drive.size());
  for (std::size_t i = 0; i < drive.size(); ++i) {
    r.spikes[i] = if_update(r.next.v[i], drive[i], mode) ? 1 : 0;
  }
  return r;
}

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::accumulator: return "accumulator";
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  if (name == "conv2d") return LayerKind::conv2d;
  if (name == "maxpool") return LayerKind::maxpool;
  if (name == "flatten") return LayerKind::flatten;
  if (name == "dense") return LayerKind::dense;
  if (name == "accumulator") return LayerKind::accumulator;
  throw InvalidInput("unknown layer kind '" + name + "'");
}

std::size_t LayerSpec::weight_count() const {
  switch (kind) {
    case LayerKind::conv2d: return kernel_h * kernel_w * in_shape.channels * out_channels;
    case LayerKind::dense: return in_features * out_features;
    default: return 0;
  }
}

std::size_t LayerSpec::fan_in() const {
  if (kind == LayerKind::conv2d) return kernel_h * kernel_w * in_shape.channels;
  if (kind == LayerKind::dense) return in_features;
  return 0;
}

std::size_t LayerSpec::fan_out() const {
  if (kind == LayerKind::conv2d) return kernel_h * kernel_w * out_channels;
  if (kind == LayerKind::dense) return out_features;
  return 0;
}

void resolve_shapes(std::vector<LayerSpec>& layers, Shape3 input) {
  if (input.size() == 0) throw InvalidInput("network input shape is empty");
  if (layers.empty() || layers.back().kind != LayerKind::accumulator) {
    throw InvalidInput("layer stack must end with an accumulator");
  }
  Shape3 shape = input;
  bool flat = false;
  bool last_spiking = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) + ")";
    l.in_shape = shape;
    switch (l.kind) {
      case LayerKind::conv2d:
        if (flat) throw InvalidInput(where + ": convolution after flatten");
        if (l.stride != 1 || l.padding != 0) {
          throw InvalidInput(where + ": only stride 1 without padding is supported");
        }
        if (l.kernel_h == 0 || l.kernel_w == 0 || l.out_channels == 0 ||
            shape.height < l.kernel_h || shape.width < l.kernel_w) {
          throw InvalidInput(where + ": kernel does not fit the input");
        }
        shape = {l.out_channels, shape.height - l.kernel_h + 1, shape.width - l.kernel_w + 1};
        last_spiking = true;
        break;
      case LayerKind::maxpool:
        if (flat) throw InvalidInput(where + ": pooling after flatten");
        if (l.pool == 0 || l.pool_stride == 0 || shape.height < l.pool || shape.width < l.pool) {
          throw InvalidInput(where + ": pooling window does not fit the input");
        }
        shape = {shape.channels, (shape.height - l.pool) / l.pool_stride + 1,
                 (shape.width - l.pool) / l.pool_stride + 1};
        break;
      case LayerKind::flatten:
        shape = {shape.size(), 1, 1};
        flat = true;
        break;
      case LayerKind::dense:
        if (!flat) throw InvalidInput(where + ": dense layer needs a flattened input");
        if (l.in_features == 0) l.in_features = shape.size();
        if (l.in_features != shape.size()) {
          throw InvalidInput(where + ": expects " + std::to_string(l.in_features) +
                             " inputs, previous layer gives " + std::to_string(shape.size()));
        }
        if (l.out_features == 0) throw InvalidInput(where + ": zero output width");
        shape = {l.out_features, 1, 1};
        last_spiking = true;
        break;
      case LayerKind::accumulator:
        if (i + 1 != layers.size()) throw InvalidInput(where + ": must be the last layer");
        if (!last_spiking || layers[i - 1].kind != LayerKind::dense) {
          throw InvalidInput(where + ": must follow a dense spiking layer");
        }
        break;
    }
    l.out_shape = shape;
  }
}

std::vector<LayerSpec> build_architecture(const ArchitectureConfig& cfg) {
  std::vector<LayerSpec> layers(6);
  layers[0].kind = LayerKind::conv2d;
  layers[0].kernel_h = layers[0].kernel_w = cfg.kernel;
  layers[0].out_channels = cfg.conv_channels;
  layers[1].kind = LayerKind::maxpool;
  layers[1].pool = layers[1].pool_stride = cfg.pool;
  layers[2].kind = LayerKind::flatten;
  layers[3].kind = LayerKind::dense;
  layers[3].out_features = cfg.hidden;
  layers[4].kind = LayerKind::dense;
  layers[4].out_features = cfg.classes;
  layers[5].kind = LayerKind::accumulator;
  resolve_shapes(layers, cfg.input);
  return layers;
}

std::size_t SnnModel::num_classes() const {
  return layers.empty() ? 0 : layers.back().out_shape.size();
}

std::size_t SnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  return n;
}

std::size_t SnnModel::spiking_layer_count() const {
  return static_cast<std::size_t>(
      std::count_if(layers.begin(), layers.end(), [](const LayerSpec& l) { return l.spiking(); }));
}

const std::vector<double>& SnnModel::layer_weights(std::size_t layer, bool use_quantized) const {
  if (!use_quantized) return weights[layer];
  if (!quantized) throw MissingQuantizedWeights("model has no quantized weights");
  return quantized->dequantized[layer];
}

SnnModel make_model(const ArchitectureConfig& cfg, std::size_t t_inf, NeuronMode mode) {
  if (t_inf == 0) throw InvalidInput("T_inf must be positive");
  SnnModel m;
  m.input_shape = cfg.input;
  m.layers = build_architecture(cfg);
  m.t_inf = t_inf;
  m.neuron_mode = mode;
  m.weights.resize(m.layers.size());
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    m.weights[i].assign(m.layers[i].weight_count(), 0.0);
  }
  return m;
}

void initialize_weights(SnnModel& model, std::uint64_t seed, double gain) {
  if (!(gain > 0.0) || !std::isfinite(gain)) throw InvalidInput("initialization gain must be positive");
  Rng rng(seed);
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& l = model.layers[i];
    auto& w = model.weights[i];
    w.assign(l.weight_count(), 0.0);
    if (w.empty()) continue;
    const double bound = gain * std::sqrt(6.0 / static_cast<double>(l.fan_in() + l.fan_out()));
    for (double& x : w) x = rng.uniform(-bound, bound);
  }
  model.quantized.reset();
}

void quantize_model(SnnModel& model, int bits) {
  QuantizedView view;
  view.bits = bits;
  view.tensors.resize(model.layers.size());
  view.dequantized.resize(model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (model.weights[i].empty()) continue;
    view.tensors[i] = quant::quantize(model.weights[i], bits);
    view.dequantized[i] = quant::dequantize(view.tensors[i]);
  }
  model.quantized = std::move(view);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

PoolResult maxpool_spikes(std::span<const std::uint8_t> spikes, std::size_t height,
                          std::size_t width, std::size_t channels, std::size_t window,
                          std::size_t stride) {
  if (window == 0 || stride == 0) throw InvalidInput("pooling window and stride must be positive");
  if (spikes.size() != height * width * channels) {
    throw InvalidInput("spike map does not match its shape");
  }
  PoolResult r;
  if (height < window || width < window) return r;
  r.out_height = (height - window) / stride + 1;
  r.out_width = (width - window) / stride + 1;
  r.spikes.assign(r.out_height * r.out_width * channels, 0);
  r.argmax.assign(r.spikes.size(), 0);
  for (std::size_t oy = 0; oy < r.out_height; ++oy) {
    for (std::size_t ox = 0; ox < r.out_width; ++ox) {
      for (std::size_t c = 0; c < channels; ++c) {
        std::size_t best = (oy * stride * width + ox * stride) * channels + c;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t src = ((oy * stride + dy) * width + ox * stride + dx) * channels + c;
            if (spikes[src] > spikes[best]) best = src;
          }
        }
        const std::size_t dst = (oy * r.out_width + ox) * channels + c;
        r.spikes[dst] = spikes[best];
        r.argmax[dst] = best;
      }
    }
  }
  return r;
}

namespace {

// Scatter from nonzero inputs in (y, x, c_in) raster order; every output
// therefore sums its receptive field in (kh, kw, c_in) order.
std::vector<double> conv_forward(const std::vector<double>& in, const LayerSpec& l,
                                 const std::vector<double>& w, std::size_t t_inf) {
  const Shape3 is = l.in_shape;
  const Shape3 os = l.out_shape;
  const std::size_t co_n = os.channels;
  std::vector<double> drive(t_inf * os.size(), 0.0);
  for (std::size_t k = 0; k < t_inf; ++k) {
    const double* src = in.data() + k * is.size();
    double* dst = drive.data() + k * os.size();
    for (std::size_t y = 0; y < is.height; ++y) {
      for (std::size_t x = 0; x < is.width; ++x) {
        for (std::size_t ci = 0; ci < is.channels; ++ci) {
          const double s = src[(y * is.width + x) * is.channels + ci];
          if (s == 0.0) continue;
          for (std::size_t kh = 0; kh < l.kernel_h; ++kh) {
            if (y < kh || y - kh >= os.height) continue;
            const std::size_t oy = y - kh;
            for (std::size_t kw = 0; kw < l.kernel_w; ++kw) {
              if (x < kw || x - kw >= os.width) continue;
              const std::size_t ox = x - kw;
              const double* wr = w.data() + ((kh * l.kernel_w + kw) * is.channels + ci) * co_n;
              double* d = dst + (oy * os.width + ox) * co_n;
              for (std::size_t co = 0; co < co_n; ++co) d[co] += wr[co] * s;
            }
          }
        }
      }
    }
  }
  return drive;
}

std::vector<double> dense_forward(const std::vector<double>& in, const LayerSpec& l,
                                  const std::vector<double>& w, std::size_t t_inf) {
  const std::size_t n_in = l.in_features;
  const std::size_t n_out = l.out_features;
  std::vector<double> drive(t_inf * n_out, 0.0);
  for (std::size_t k = 0; k < t_inf; ++k) {
    const double* src = in.data() + k * n_in;
    double* d = drive.data() + k * n_out;
    for (std::size_t j = 0; j < n_in; ++j) {
      const double s = src[j];
      if (s == 0.0) continue;
      const double* wr = w.data() + j * n_out;
      for (std::size_t o = 0; o < n_out; ++o) d[o] += wr[o] * s;
    }
  }
  return drive;
}

void integrate_and_fire(LayerActivity& a, std::size_t t_inf, std::size_t n, NeuronMode mode,
                        SpikeFunction fn) {
  a.v_pre.resize(t_inf * n);
  a.fired.resize(t_inf * n);
  a.out.resize(t_inf * n);
  std::vector<double> v(n, 0.0);
  for (std::size_t k = 0; k < t_inf; ++k) {
    const std::size_t base = k * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double drive = a.drive[base + i];
      const double decided_on =
          mode == NeuronMode::compare_then_integrate ? v[i] : v[i] + drive;
      const bool fired = if_update(v[i], drive, mode);
      a.v_pre[base + i] = decided_on;
      a.fired[base + i] = fired ? 1 : 0;
      a.out[base + i] = fn == SpikeFunction::hard ? (fired ? 1.0 : 0.0)
                                                  : relaxed_spike(decided_on - kThreshold);
    }
  }
}

void pool_forward(const std::vector<double>& in, const LayerSpec& l, std::size_t t_inf,
                  LayerActivity& a) {
  const Shape3 is = l.in_shape;
  const Shape3 os = l.out_shape;
  const std::size_t c_n = is.channels;
  a.out.assign(t_inf * os.size(), 0.0);
  a.route.assign(t_inf * os.size(), 0);
  for (std::size_t k = 0; k < t_inf; ++k) {
    const double* src = in.data() + k * is.size();
    for (std::size_t oy = 0; oy < os.height; ++oy) {
      for (std::size_t ox = 0; ox < os.width; ++ox) {
        for (std::size_t c = 0; c < c_n; ++c) {
          const std::size_t y0 = oy * l.pool_stride;
          const std::size_t x0 = ox * l.pool_stride;
          std::size_t best = (y0 * is.width + x0) * c_n + c;
          for (std::size_t dy = 0; dy < l.pool; ++dy) {
            for (std::size_t dx = 0; dx < l.pool; ++dx) {
              const std::size_t idx = ((y0 + dy) * is.width + x0 + dx) * c_n + c;
              if (src[idx] > src[best]) best = idx;
            }
          }
          const std::size_t dst = k * os.size() + (oy * os.width + ox) * c_n + c;
          a.out[dst] = src[best];
          a.route[dst] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
}

}  // namespace

std::vector<double> input_activity(const SnnModel& model, const encoding::SpikeTensor& input) {
  const Shape3 s = model.input_shape;
  if (input.t_inf != model.t_inf) {
    throw InvalidInput("input has T_inf = " + std::to_string(input.t_inf) +
                       ", model expects " + std::to_string(model.t_inf));
  }
  if (input.channels != s.channels || input.height != s.height || input.width != s.width) {
    throw InvalidInput("input spatial shape " + std::to_string(input.channels) + "x" +
                       std::to_string(input.height) + "x" + std::to_string(input.width) +
                       " does not match the model input " + std::to_string(s.channels) + "x" +
                       std::to_string(s.height) + "x" + std::to_string(s.width));
  }
  if (input.bits.size() != input.t_inf * input.step_size()) {
    throw InvalidInput("spike tensor payload does not match its shape");
  }
  std::vector<double> out(input.bits.size());
  for (std::size_t k = 0; k < input.t_inf; ++k) {
    for (std::size_t c = 0; c < s.channels; ++c) {
      for (std::size_t y = 0; y < s.height; ++y) {
        for (std::size_t x = 0; x < s.width; ++x) {
          out[k * s.size() + (y * s.width + x) * s.channels + c] = input.at(k, c, y, x);
        }
      }
    }
  }
  return out;
}

NetworkActivity run_network(const SnnModel& model, const encoding::SpikeTensor& input,
                            bool use_quantized, SpikeFunction fn) {
  if (use_quantized && !model.quantized) {
    throw MissingQuantizedWeights("quantized forward requested but the model has no quantized view");
  }
  NetworkActivity acts;
  acts.t_inf = model.t_inf;
  acts.input = input_activity(model, input);
  acts.layers.resize(model.layers.size());

  const std::size_t t_inf = model.t_inf;
  const std::vector<double>* current = &acts.input;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerSpec& l = model.layers[i];
    LayerActivity& a = acts.layers[i];
    switch (l.kind) {
      case LayerKind::conv2d:
        a.drive = conv_forward(*current, l, model.layer_weights(i, use_quantized), t_inf);
        integrate_and_fire(a, t_inf, l.out_shape.size(), model.neuron_mode, fn);
        break;
      case LayerKind::dense:
        a.drive = dense_forward(*current, l, model.layer_weights(i, use_quantized), t_inf);
        integrate_and_fire(a, t_inf, l.out_shape.size(), model.neuron_mode, fn);
        break;
      case LayerKind::maxpool:
        pool_forward(*current, l, t_inf, a);
        break;
      case LayerKind::flatten:
        a.out = *current;
        break;
      case LayerKind::accumulator: {
        const std::size_t n = l.in_shape.size();
        acts.accumulator.assign(n, 0.0);
        for (std::size_t k = 0; k < t_inf; ++k) {
          for (std::size_t c = 0; c < n; ++c) acts.accumulator[c] += (*current)[k * n + c];
        }
        break;
      }
    }
    if (l.kind != LayerKind::accumulator) current = &a.out;
  }
  return acts;
}

ForwardResult forward(const SnnModel& model, const encoding::SpikeTensor& input,
                      bool use_quantized, bool record_steps) {
  const NetworkActivity acts = run_network(model, input, use_quantized, SpikeFunction::hard);
  ForwardResult r;
  r.trace.accumulator = acts.accumulator;
  r.probabilities = softmax(acts.accumulator);

  const std::size_t t_inf = model.t_inf;
  const std::size_t n_in = model.input_shape.size();
  if (record_steps) {
    r.trace.per_step_spikes.assign(t_inf, std::vector<std::size_t>(1 + model.spiking_layer_count(), 0));
  }
  for (std::size_t k = 0; k < t_inf; ++k) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n_in; ++i) c += acts.input[k * n_in + i] != 0.0;
    r.trace.input_spikes += c;
    if (record_steps) r.trace.per_step_spikes[k][0] = c;
  }
  std::size_t slot = 0;
  for (std::size_t li = 0; li < model.layers.size(); ++li) {
    if (!model.layers[li].spiking()) continue;
    ++slot;
    const auto& fired = acts.layers[li].fired;
    const std::size_t n = model.layers[li].out_shape.size();
    std::size_t total = 0;
    for (std::size_t k = 0; k < t_inf; ++k) {
      std::size_t c = 0;
      for (std::size_t i = 0; i < n; ++i) c += fired[k * n + i];
      total += c;
      if (record_steps) r.trace.per_step_spikes[k][slot] = c;
    }
    r.trace.layer_spikes.push_back(total);
  }
  r.trace.total_spikes = r.trace.input_spikes;
  for (std::size_t c : r.trace.layer_spikes) r.trace.total_spikes += c;
  return r;
}

}  // namespace spikeradar::snn
