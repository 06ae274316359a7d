#pragma once

// Slow, direct reference implementations used as test oracles. Nothing here
// calls into the library's numeric kernels.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spikeradar/snn.hpp"

namespace oracle {

using cd = std::complex<double>;

inline std::vector<cd> naive_dft(const std::vector<cd>& x, std::size_t n) {
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd acc = 0.0;
    for (std::size_t i = 0; i < x.size() && i < n; ++i) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * i % n) / static_cast<double>(n);
      acc += x[i] * cd(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> blackman(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    w[i] = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2.0 * a);
  }
  return w;
}

inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

// Window starts enumerated directly: m * hop + len_w <= total.
inline std::size_t enumerate_windows(std::size_t total, std::size_t len_w, std::size_t hop) {
  std::size_t count = 0;
  for (std::size_t m = 0; m * hop + len_w <= total; ++m) ++count;
  return count;
}

// |DFT| of each Hann-windowed, fully contained window, zero Doppler centred.
inline std::vector<std::vector<double>> naive_stft(const std::vector<cd>& x, std::size_t s,
                                                   std::size_t hop) {
  const auto w = hann(s);
  std::vector<std::vector<double>> rows;
  for (std::size_t m = 0; m * hop + s <= x.size(); ++m) {
    std::vector<cd> seg(s);
    for (std::size_t i = 0; i < s; ++i) seg[i] = x[m * hop + i] * w[i];
    const auto spec = naive_dft(seg, s);
    std::vector<double> row(s);
    for (std::size_t j = 0; j < s; ++j) row[j] = std::abs(spec[(j + s - s / 2) % s]);
    rows.push_back(row);
  }
  return rows;
}

// Step-major scalar simulation of the layer stack. Activations are kept as
// [c][h][w] arrays; weights are read through the library's layouts.
struct ScalarTrace {
  std::vector<double> accumulator;
  std::size_t input_spikes = 0;
  std::vector<std::size_t> layer_spikes;
};

inline ScalarTrace scalar_forward(const spikeradar::snn::SnnModel& model,
                                  const std::vector<std::vector<double>>& input_steps,
                                  bool use_quantized) {
  using spikeradar::snn::LayerKind;
  const std::size_t n_layers = model.layers.size();
  std::vector<std::vector<double>> potential(n_layers);
  ScalarTrace tr;
  tr.accumulator.assign(model.num_classes(), 0.0);
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (model.layers[i].spiking()) {
      potential[i].assign(model.layers[i].out_shape.size(), 0.0);
      tr.layer_spikes.push_back(0);
    }
  }

  for (std::size_t k = 0; k < model.t_inf; ++k) {
    // act is indexed [c][h][w] for spatial tensors, [j] after flatten.
    std::vector<double> act = input_steps[k];
    for (double v : act) tr.input_spikes += v != 0.0;
    spikeradar::snn::Shape3 shape = model.input_shape;
    std::size_t spiking_index = 0;
    for (std::size_t li = 0; li < n_layers; ++li) {
      const auto& l = model.layers[li];
      const auto& w = l.spiking() ? model.layer_weights(li, use_quantized) : std::vector<double>{};
      if (l.kind == LayerKind::conv2d) {
        const auto os = l.out_shape;
        std::vector<double> drive(os.size(), 0.0);  // [co][y][x]
        for (std::size_t co = 0; co < os.channels; ++co)
          for (std::size_t y = 0; y < os.height; ++y)
            for (std::size_t x = 0; x < os.width; ++x) {
              double acc = 0.0;
              for (std::size_t kh = 0; kh < l.kernel_h; ++kh)
                for (std::size_t kw = 0; kw < l.kernel_w; ++kw)
                  for (std::size_t ci = 0; ci < shape.channels; ++ci) {
                    const double s = act[(ci * shape.height + y + kh) * shape.width + x + kw];
                    if (s == 0.0) continue;
                    acc += w[((kh * l.kernel_w + kw) * shape.channels + ci) * os.channels + co] * s;
                  }
              drive[(co * os.height + y) * os.width + x] = acc;
            }
        act = drive;
        shape = os;
      } else if (l.kind == LayerKind::dense) {
        std::vector<double> drive(l.out_features, 0.0);
        for (std::size_t o = 0; o < l.out_features; ++o) {
          double acc = 0.0;
          for (std::size_t j = 0; j < l.in_features; ++j) {
            if (act[j] == 0.0) continue;
            acc += w[j * l.out_features + o] * act[j];
          }
          drive[o] = acc;
        }
        act = drive;
      } else if (l.kind == LayerKind::maxpool) {
        const auto os = l.out_shape;
        std::vector<double> pooled(os.size(), 0.0);
        for (std::size_t c = 0; c < os.channels; ++c)
          for (std::size_t y = 0; y < os.height; ++y)
            for (std::size_t x = 0; x < os.width; ++x) {
              double m = 0.0;
              for (std::size_t dy = 0; dy < l.pool; ++dy)
                for (std::size_t dx = 0; dx < l.pool; ++dx) {
                  const std::size_t yy = y * l.pool_stride + dy;
                  const std::size_t xx = x * l.pool_stride + dx;
                  m = std::max(m, act[(c * shape.height + yy) * shape.width + xx]);
                }
              pooled[(c * os.height + y) * os.width + x] = m;
            }
        act = pooled;
        shape = os;
      } else if (l.kind == LayerKind::flatten) {
        // Flatten order is (h, w, c).
        std::vector<double> flat;
        for (std::size_t y = 0; y < shape.height; ++y)
          for (std::size_t x = 0; x < shape.width; ++x)
            for (std::size_t c = 0; c < shape.channels; ++c)
              flat.push_back(act[(c * shape.height + y) * shape.width + x]);
        act = flat;
      } else {
        for (std::size_t c = 0; c < act.size(); ++c) tr.accumulator[c] += act[c];
      }

      if (l.spiking()) {
        // Output layout of a conv drive is [co][y][x]; potential uses the
        // same indexing.
        auto& v = potential[li];
        std::vector<double> spikes(act.size(), 0.0);
        for (std::size_t i = 0; i < act.size(); ++i) {
          if (model.neuron_mode == spikeradar::snn::NeuronMode::compare_then_integrate) {
            if (v[i] >= 1.0) {
              v[i] = 0.0;
              spikes[i] = 1.0;
            } else {
              v[i] = std::max(0.0, v[i] + act[i]);
            }
          } else {
            const double u = v[i] + act[i];
            if (u >= 1.0) {
              v[i] = 0.0;
              spikes[i] = 1.0;
            } else {
              v[i] = std::max(0.0, u);
            }
          }
          tr.layer_spikes[spiking_index] += spikes[i] != 0.0;
        }
        ++spiking_index;
        act = spikes;
      }
    }
  }
  return tr;
}

// Random spike input for a (1 or more)-channel model as [step][c][h][w].
inline std::vector<std::vector<double>> random_steps(std::mt19937_64& gen, std::size_t t_inf,
                                                     std::size_t n, double density) {
  std::bernoulli_distribution bit(density);
  std::vector<std::vector<double>> steps(t_inf, std::vector<double>(n));
  for (auto& s : steps)
    for (double& v : s) v = bit(gen) ? 1.0 : 0.0;
  return steps;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("spikeradar_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
