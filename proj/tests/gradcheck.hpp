#pragma once

// Finite-difference gradient checking on small random networks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "spikeradar/training.hpp"

namespace gradcheck {

using namespace spikeradar;
using namespace spikeradar::train;

inline snn::SnnModel gradcheck_model(std::mt19937_64& gen, std::size_t t_inf, snn::NeuronMode mode) {
  snn::ArchitectureConfig a;
  a.input = {1, 6, 6};
  a.kernel = 3;
  a.conv_channels = 2;
  a.hidden = 6;
  a.classes = 3;
  auto m = snn::make_model(a, t_inf, mode);
  std::uniform_real_distribution<double> u(-0.8, 1.4);
  for (auto& w : m.weights)
    for (double& x : w) x = u(gen);
  return m;
}

inline std::vector<encoding::SpikeTensor> random_inputs(std::mt19937_64& gen, const snn::SnnModel& m,
                                                 std::size_t n, double density) {
  std::vector<encoding::SpikeTensor> xs;
  for (std::size_t i = 0; i < n; ++i) {
    encoding::SpikeTensor t(m.t_inf, m.input_shape.channels, m.input_shape.height, m.input_shape.width);
    std::bernoulli_distribution bit(density);
    for (auto& b : t.bits) b = bit(gen);
    xs.push_back(std::move(t));
  }
  return xs;
}

inline std::vector<const encoding::SpikeTensor*> pointers(const std::vector<encoding::SpikeTensor>& xs) {
  std::vector<const encoding::SpikeTensor*> p;
  for (const auto& x : xs) p.push_back(&x);
  return p;
}

struct CheckResult {
  double worst = 0.0;       // largest relative error over compared coordinates
  std::size_t compared = 0;
  std::size_t kinks = 0;    // coordinates with a hard branch inside [w - eps, w + eps]
  std::size_t total = 0;
};

// Central differences with step 1e-4. Coordinates where both gradients are
// below 1e-8 are skipped, as are coordinates whose forward and backward
// one-sided differences disagree by more than 10% (the relaxed loss still has
// hard fire/clamp branches, so it is only piecewise smooth).
inline CheckResult gradient_check(snn::SnnModel m, const BatchView& batch, const BpttOptions& opts) {
  const auto g = backprop_through_time(m, batch, opts);
  const double eps = 1e-4;
  const double f0 = batch_loss(m, batch, opts);
  CheckResult r;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    if (g.weights[l].size() != m.weights[l].size()) {
      r.worst = INFINITY;
      return r;
    }
    for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
      ++r.total;
      const double w0 = m.weights[l][i];
      m.weights[l][i] = w0 + eps;
      const double up = batch_loss(m, batch, opts);
      m.weights[l][i] = w0 - eps;
      const double down = batch_loss(m, batch, opts);
      m.weights[l][i] = w0;
      const double fwd = (up - f0) / eps;
      const double bwd = (f0 - down) / eps;
      if (std::abs(fwd - bwd) > 0.1 * std::max(std::abs(fwd), std::abs(bwd)) + 1e-9) {
        ++r.kinks;
        continue;
      }
      const double fd = (up - down) / (2.0 * eps);
      const double an = g.weights[l][i];
      if (std::abs(fd) < 1e-8 && std::abs(an) < 1e-8) continue;
      r.worst = std::max(r.worst, std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)));
      ++r.compared;
    }
  }
  return r;
}

}  // namespace gradcheck
