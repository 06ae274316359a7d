#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spikeradar/encoding.hpp"
#include "spikeradar/snn.hpp"
#include "spikeradar/surrogate.hpp"

namespace spikeradar::train {

// Gaussian surrogate: sigma'(x) = exp(-2 x^2) / sqrt(2 pi), evaluated at the
// distance of the potential from the firing threshold.
struct SurrogateSpec {
  double threshold = snn::kThreshold;
  double derivative(double v_pre) const { return snn::surrogate_derivative(v_pre - threshold); }
};

// grad_out * sigma'(v_pre - 1), element-wise.
std::vector<double> spike_backward(std::span<const double> grad_out,
                                   std::span<const double> v_pre);

using LayerTensors = std::vector<std::vector<double>>;

struct Gradients {
  LayerTensors weights;  // mirrors SnnModel::weights
  double loss = 0.0;     // mean cross-entropy over the batch
};

struct BatchView {
  std::span<const encoding::SpikeTensor* const> inputs;
  std::span<const std::size_t> labels;
};

struct BpttOptions {
  bool use_quantized_forward = false;
  snn::SpikeFunction spike_fn = snn::SpikeFunction::hard;
  std::size_t jobs = 1;
};

// Mean cross-entropy of softmax(A) over the batch and its gradient with
// respect to the full-precision weights. With use_quantized_forward the
// forward runs on the quantized view and the gradient passes straight
// through to the full-precision weights. The reset branch is treated as a
// constant; non-spiking steps carry gradient through the membrane.
//
// Examples are processed in fixed chunks whose partial sums are combined by
// a fixed pairwise tree, so the result does not depend on `jobs`.
Gradients backprop_through_time(const snn::SnnModel& model, const BatchView& batch,
                                const BpttOptions& opts = {});

// Loss only (used by finite-difference checks).
double batch_loss(const snn::SnnModel& model, const BatchView& batch,
                  const BpttOptions& opts = {});

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  LayerTensors m;
  LayerTensors v;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const LayerTensors& weights);

// Bias-corrected Adam. Throws NonFiniteGradient before touching anything if
// a gradient entry is NaN or infinite.
void adam_step(LayerTensors& weights, const LayerTensors& grads, AdamState& state,
               const AdamConfig& cfg);

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch = 128;
  std::size_t epochs_full = 14;
  std::size_t epochs_qat = 1;
  std::size_t folds = 6;
  std::size_t fold_limit = 0;  // run only the first n folds; 0 runs all
  int bits = 4;
  double init_gain = snn::kDefaultInitGain;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool verbose = false;

  void validate() const;
};

struct TrainingSet {
  std::vector<encoding::SpikeTensor> inputs;
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
  double accuracy = 0.0;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

struct FoldReport {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted], summed over folds
  std::size_t best_fold = 0;
};

struct TrainResult {
  snn::SnnModel model;  // the best fold's model, with its quantized view
  FoldReport report;
};

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::size_t> predictions;
};

EvalResult evaluate(const snn::SnnModel& model, std::span<const encoding::SpikeTensor* const> inputs,
                    std::span<const std::size_t> labels, bool use_quantized, std::size_t jobs = 1);

// k-fold cross-validation. Each fold starts from freshly initialized weights,
// runs epochs_full full-precision epochs and epochs_qat epochs with a
// quantized forward (re-quantized before every batch), then scores the
// validation fold with the quantized forward.
TrainResult train(const snn::SnnModel& architecture, const TrainingSet& data,
                  const TrainConfig& cfg);

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace spikeradar::train
