#include "spikeradar/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

#include "spikeradar/dataset.hpp"
#include "spikeradar/error.hpp"
#include "spikeradar/random.hpp"
#include "spikeradar/surrogate.hpp"

namespace spikeradar::train {

using snn::LayerKind;
using snn::LayerSpec;
using snn::NetworkActivity;
using snn::SnnModel;

namespace {

// Examples per gradient chunk. Fixed so reduction order never depends on the
// worker count.
constexpr std::size_t kChunk = 16;

bool all_zero(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] != 0.0) return false;
  }
  return true;
}

// Gradient with respect to the drive of an IF layer, given the gradient with
// respect to its spike outputs.
std::vector<double> if_backward(const snn::LayerActivity& a, const std::vector<double>& g_out,
                                std::size_t t_inf, std::size_t n, snn::NeuronMode mode) {
  std::vector<double> g_drive(t_inf * n, 0.0);
  std::vector<double> g_next(n, 0.0);  // dL/dV^{k+1}
  for (std::size_t kk = t_inf; kk-- > 0;) {
    const std::size_t base = kk * n;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = base + i;
      const double vp = a.v_pre[idx];
      const bool fired = a.fired[idx] != 0;
      const double go = g_out[idx];
      const double spike_term = go != 0.0 ? go * snn::surrogate_derivative(vp - snn::kThreshold) : 0.0;
      if (mode == snn::NeuronMode::compare_then_integrate) {
        const bool carry = !fired && vp + a.drive[idx] >= 0.0;
        const double through = carry ? g_next[i] : 0.0;
        g_drive[idx] = through;
        g_next[i] = spike_term + through;
      } else {
        const bool carry = !fired && vp >= 0.0;
        const double gu = spike_term + (carry ? g_next[i] : 0.0);
        g_drive[idx] = gu;
        g_next[i] = gu;
      }
    }
  }
  return g_drive;
}

void dense_backward(const LayerSpec& l, const std::vector<double>& in,
                    const std::vector<double>& w, const std::vector<double>& g_drive,
                    std::size_t t_inf, std::vector<double>& g_w, std::vector<double>* g_in) {
  const std::size_t n_in = l.in_features;
  const std::size_t n_out = l.out_features;
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < t_inf; ++k) {
    if (!all_zero(g_drive.data() + k * n_out, n_out)) active.push_back(k);
  }
  for (std::size_t k : active) {
    const double* g = g_drive.data() + k * n_out;
    const double* src = in.data() + k * n_in;
    for (std::size_t j = 0; j < n_in; ++j) {
      const double s = src[j];
      if (s == 0.0) continue;
      double* gw = g_w.data() + j * n_out;
      for (std::size_t o = 0; o < n_out; ++o) gw[o] += s * g[o];
    }
  }
  if (!g_in) return;
  g_in->assign(t_inf * n_in, 0.0);
  if (active.empty()) return;
  for (std::size_t j = 0; j < n_in; ++j) {
    const double* wr = w.data() + j * n_out;
    for (std::size_t k : active) {
      const double* g = g_drive.data() + k * n_out;
      double acc = 0.0;
      for (std::size_t o = 0; o < n_out; ++o) acc += wr[o] * g[o];
      (*g_in)[k * n_in + j] = acc;
    }
  }
}

void conv_backward(const LayerSpec& l, const std::vector<double>& in,
                   const std::vector<double>& w, const std::vector<double>& g_drive,
                   std::size_t t_inf, std::vector<double>& g_w, std::vector<double>* g_in) {
  const snn::Shape3 is = l.in_shape;
  const snn::Shape3 os = l.out_shape;
  const std::size_t co_n = os.channels;
  if (g_in) g_in->assign(t_inf * is.size(), 0.0);
  for (std::size_t k = 0; k < t_inf; ++k) {
    const double* g = g_drive.data() + k * os.size();
    if (all_zero(g, os.size())) continue;
    const double* src = in.data() + k * is.size();
    for (std::size_t y = 0; y < is.height; ++y) {
      for (std::size_t x = 0; x < is.width; ++x) {
        for (std::size_t ci = 0; ci < is.channels; ++ci) {
          const double s = src[(y * is.width + x) * is.channels + ci];
          double g_acc = 0.0;
          for (std::size_t kh = 0; kh < l.kernel_h; ++kh) {
            if (y < kh || y - kh >= os.height) continue;
            for (std::size_t kw = 0; kw < l.kernel_w; ++kw) {
              if (x < kw || x - kw >= os.width) continue;
              const double* go = g + ((y - kh) * os.width + (x - kw)) * co_n;
              const std::size_t woff = ((kh * l.kernel_w + kw) * is.channels + ci) * co_n;
              if (s != 0.0) {
                double* gw = g_w.data() + woff;
                for (std::size_t co = 0; co < co_n; ++co) gw[co] += s * go[co];
              }
              if (g_in) {
                const double* wr = w.data() + woff;
                for (std::size_t co = 0; co < co_n; ++co) g_acc += wr[co] * go[co];
              }
            }
          }
          if (g_in) (*g_in)[k * is.size() + (y * is.width + x) * is.channels + ci] = g_acc;
        }
      }
    }
  }
}

double example_loss(const std::vector<double>& accumulator, std::size_t label) {
  const double top = *std::max_element(accumulator.begin(), accumulator.end());
  double sum = 0.0;
  for (double a : accumulator) sum += std::exp(a - top);
  return std::log(sum) + top - accumulator[label];
}

// Adds one example's contribution (scaled by `scale`) to `grads`; returns
// the example's unscaled loss.
double accumulate_example(const SnnModel& model, const encoding::SpikeTensor& input,
                          std::size_t label, double scale, const BpttOptions& opts,
                          LayerTensors& grads) {
  const NetworkActivity acts =
      snn::run_network(model, input, opts.use_quantized_forward, opts.spike_fn);
  const std::size_t t_inf = model.t_inf;
  const auto probs = snn::softmax(acts.accumulator);

  std::size_t first_param = model.layers.size();
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    if (!model.weights[i].empty()) {
      first_param = i;
      break;
    }
  }

  std::vector<double> g_cur;
  for (std::size_t i = model.layers.size(); i-- > 0;) {
    const LayerSpec& l = model.layers[i];
    const std::vector<double>& in = i == 0 ? acts.input : acts.layers[i - 1].out;
    switch (l.kind) {
      case LayerKind::accumulator: {
        const std::size_t n = l.in_shape.size();
        g_cur.assign(t_inf * n, 0.0);
        for (std::size_t c = 0; c < n; ++c) {
          const double g = (probs[c] - (c == label ? 1.0 : 0.0)) * scale;
          for (std::size_t k = 0; k < t_inf; ++k) g_cur[k * n + c] = g;
        }
        break;
      }
      case LayerKind::dense:
      case LayerKind::conv2d: {
        const auto g_drive =
            if_backward(acts.layers[i], g_cur, t_inf, l.out_shape.size(), model.neuron_mode);
        const auto& w = model.layer_weights(i, opts.use_quantized_forward);
        std::vector<double> g_in;
        std::vector<double>* g_in_ptr = i > first_param ? &g_in : nullptr;
        if (l.kind == LayerKind::dense) {
          dense_backward(l, in, w, g_drive, t_inf, grads[i], g_in_ptr);
        } else {
          conv_backward(l, in, w, g_drive, t_inf, grads[i], g_in_ptr);
        }
        g_cur = std::move(g_in);
        break;
      }
      case LayerKind::maxpool: {
        const std::size_t n_out = l.out_shape.size();
        const std::size_t n_in = l.in_shape.size();
        std::vector<double> g_in(t_inf * n_in, 0.0);
        const auto& route = acts.layers[i].route;
        for (std::size_t k = 0; k < t_inf; ++k) {
          for (std::size_t o = 0; o < n_out; ++o) {
            g_in[k * n_in + route[k * n_out + o]] += g_cur[k * n_out + o];
          }
        }
        g_cur = std::move(g_in);
        break;
      }
      case LayerKind::flatten:
        break;
    }
    if (i <= first_param) break;
  }
  return example_loss(acts.accumulator, label);
}

LayerTensors zeros_like(const LayerTensors& t) {
  LayerTensors z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) z[i].assign(t[i].size(), 0.0);
  return z;
}

void check_batch(const SnnModel& model, const BatchView& batch) {
  if (batch.inputs.size() != batch.labels.size()) {
    throw InvalidInput("batch has " + std::to_string(batch.inputs.size()) + " inputs but " +
                       std::to_string(batch.labels.size()) + " labels");
  }
  if (batch.inputs.empty()) throw InvalidInput("empty batch");
  const std::size_t n_classes = model.num_classes();
  for (std::size_t y : batch.labels) {
    if (y >= n_classes) {
      throw InvalidInput("label " + std::to_string(y) + " outside [0, " +
                         std::to_string(n_classes) + ")");
    }
  }
}

}  // namespace

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> spike_backward(std::span<const double> grad_out,
                                   std::span<const double> v_pre) {
  if (grad_out.size() != v_pre.size()) throw InvalidInput("spike_backward: shape mismatch");
  const SurrogateSpec surrogate;
  std::vector<double> out(grad_out.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = grad_out[i] * surrogate.derivative(v_pre[i]);
  return out;
}

Gradients backprop_through_time(const SnnModel& model, const BatchView& batch,
                                const BpttOptions& opts) {
  check_batch(model, batch);
  const std::size_t n = batch.inputs.size();
  const double scale = 1.0 / static_cast<double>(n);
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;

  std::vector<LayerTensors> partial(n_chunks);
  std::vector<double> partial_loss(n_chunks, 0.0);
  parallel_for(n_chunks, opts.jobs, [&](std::size_t c) {
    partial[c] = zeros_like(model.weights);
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t e = c * kChunk; e < end; ++e) {
      partial_loss[c] +=
          accumulate_example(model, *batch.inputs[e], batch.labels[e], scale, opts, partial[c]);
    }
  });

  // Fixed pairwise tree.
  for (std::size_t stride = 1; stride < n_chunks; stride *= 2) {
    for (std::size_t c = 0; c + stride < n_chunks; c += 2 * stride) {
      auto& dst = partial[c];
      const auto& src = partial[c + stride];
      for (std::size_t l = 0; l < dst.size(); ++l) {
        for (std::size_t i = 0; i < dst[l].size(); ++i) dst[l][i] += src[l][i];
      }
      partial_loss[c] += partial_loss[c + stride];
      partial[c + stride].clear();
    }
  }
  Gradients g;
  g.weights = std::move(partial[0]);
  g.loss = partial_loss[0] * scale;
  return g;
}

double batch_loss(const SnnModel& model, const BatchView& batch, const BpttOptions& opts) {
  check_batch(model, batch);
  double total = 0.0;
  for (std::size_t e = 0; e < batch.inputs.size(); ++e) {
    const auto acts =
        snn::run_network(model, *batch.inputs[e], opts.use_quantized_forward, opts.spike_fn);
    total += example_loss(acts.accumulator, batch.labels[e]);
  }
  return total / static_cast<double>(batch.inputs.size());
}

AdamState make_adam_state(const LayerTensors& weights) {
  AdamState s;
  s.m = zeros_like(weights);
  s.v = zeros_like(weights);
  return s;
}

void adam_step(LayerTensors& weights, const LayerTensors& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (grads.size() != weights.size()) throw InvalidInput("adam_step: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (grads[l].size() != weights[l].size()) throw InvalidInput("adam_step: shape mismatch");
    for (double g : grads[l]) {
      if (!std::isfinite(g)) {
        throw NonFiniteGradient("non-finite gradient in layer " + std::to_string(l) +
                                " at optimizer step " + std::to_string(state.step + 1));
      }
    }
  }
  if (state.m.size() != weights.size()) state = make_adam_state(weights);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    auto& m = state.m[l];
    auto& v = state.v[l];
    const auto& g = grads[l];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void TrainConfig::validate() const {
  if (folds < 2) throw InvalidInput("folds must be at least 2");
  if (batch == 0) throw InvalidInput("batch size must be positive");
  if (!(adam.lr > 0.0) || !std::isfinite(adam.lr)) throw InvalidInput("learning rate must be positive");
  if (bits < 2 || bits > 8) throw InvalidInput("bits must lie in [2, 8]");
  if (!(init_gain > 0.0) || !std::isfinite(init_gain)) throw InvalidInput("init gain must be positive");
}

EvalResult evaluate(const SnnModel& model, std::span<const encoding::SpikeTensor* const> inputs,
                    std::span<const std::size_t> labels, bool use_quantized, std::size_t jobs) {
  EvalResult r;
  r.predictions.assign(inputs.size(), 0);
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    const auto out = snn::forward(model, *inputs[i], use_quantized);
    r.predictions[i] = snn::argmax(out.probabilities);
  });
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) correct += r.predictions[i] == labels[i];
  r.accuracy = inputs.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(inputs.size());
  return r;
}

TrainResult train(const SnnModel& architecture, const TrainingSet& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.inputs.empty()) throw InvalidInput("training set is empty");
  if (data.inputs.size() != data.labels.size()) throw InvalidInput("inputs and labels differ in size");
  const std::size_t n_classes = data.num_classes;
  if (n_classes != architecture.num_classes()) {
    throw InvalidInput("dataset has " + std::to_string(n_classes) + " classes, model outputs " +
                       std::to_string(architecture.num_classes()));
  }

  const auto fold_of = data::stratified_folds(data.labels, n_classes, cfg.folds,
                                              derive_seed(cfg.seed, 0));
  const std::size_t n_run = cfg.fold_limit ? std::min(cfg.fold_limit, cfg.folds) : cfg.folds;

  TrainResult result;
  result.report.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  double best_acc = -1.0;

  for (std::size_t f = 0; f < n_run; ++f) {
    const auto fold_start = std::chrono::steady_clock::now();
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      (fold_of[i] == f ? val_idx : train_idx).push_back(i);
    }
    std::vector<std::size_t> present(n_classes, 0);
    for (std::size_t i : train_idx) ++present[data.labels[i]];
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (present[c] == 0) {
        throw StratificationError("class " + std::to_string(c) + " is absent from training fold " +
                                  std::to_string(f));
      }
    }

    SnnModel model = architecture;
    initialize_weights(model, derive_seed(cfg.seed, 100 + f), cfg.init_gain);
    AdamState adam = make_adam_state(model.weights);
    Rng order(derive_seed(cfg.seed, 200 + f));

    FoldResult fr;
    fr.fold = f;
    fr.train_size = train_idx.size();
    fr.validation_size = val_idx.size();

    std::vector<const encoding::SpikeTensor*> batch_inputs;
    std::vector<std::size_t> batch_labels;
    const std::size_t epochs = cfg.epochs_full + cfg.epochs_qat;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      const bool qat = epoch >= cfg.epochs_full;
      order.shuffle(train_idx);
      double loss_sum = 0.0;
      for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch) {
        const std::size_t end = std::min(train_idx.size(), start + cfg.batch);
        batch_inputs.clear();
        batch_labels.clear();
        for (std::size_t b = start; b < end; ++b) {
          batch_inputs.push_back(&data.inputs[train_idx[b]]);
          batch_labels.push_back(data.labels[train_idx[b]]);
        }
        if (qat) snn::quantize_model(model, cfg.bits);
        BpttOptions opts;
        opts.use_quantized_forward = qat;
        opts.jobs = cfg.jobs;
        const auto grads = backprop_through_time(model, {batch_inputs, batch_labels}, opts);
        adam_step(model.weights, grads.weights, adam, cfg.adam);
        loss_sum += grads.loss * static_cast<double>(end - start);
      }
      fr.epoch_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
      if (cfg.verbose) {
        std::fprintf(stderr, "fold %zu epoch %zu%s loss %.5f\n", f, epoch, qat ? " (qat)" : "",
                     fr.epoch_loss.back());
      }
    }
    snn::quantize_model(model, cfg.bits);

    std::vector<const encoding::SpikeTensor*> val_inputs;
    std::vector<std::size_t> val_labels;
    for (std::size_t i : val_idx) {
      val_inputs.push_back(&data.inputs[i]);
      val_labels.push_back(data.labels[i]);
    }
    const auto eval = evaluate(model, val_inputs, val_labels, true, cfg.jobs);
    fr.accuracy = eval.accuracy;
    for (std::size_t i = 0; i < val_labels.size(); ++i) {
      ++result.report.confusion[val_labels[i]][eval.predictions[i]];
    }
    if (cfg.verbose) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - fold_start).count();
      std::fprintf(stderr, "fold %zu accuracy %.4f (%.1f s)\n", f, fr.accuracy, secs);
    }
    if (fr.accuracy > best_acc) {
      best_acc = fr.accuracy;
      result.report.best_fold = f;
      result.model = model;
    }
    result.report.folds.push_back(std::move(fr));
  }

  double sum = 0.0;
  for (const auto& fr : result.report.folds) sum += fr.accuracy;
  const double n = static_cast<double>(result.report.folds.size());
  result.report.mean_accuracy = sum / n;
  double sq = 0.0;
  for (const auto& fr : result.report.folds) {
    const double d = fr.accuracy - result.report.mean_accuracy;
    sq += d * d;
  }
  result.report.std_accuracy = std::sqrt(sq / n);
  return result;
}

}  // namespace spikeradar::train
