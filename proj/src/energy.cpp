#include "spikeradar/energy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "spikeradar/error.hpp"
#include "spikeradar/training.hpp"

namespace spikeradar::energy {

void HardwareProfile::validate() const {
  const auto ok = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!ok(e_dyn) || !ok(p_stat) || !ok(delta_t)) {
    throw InvalidInput("hardware profile values must be finite and positive");
  }
}

double energy_per_classification(double n_spikes, const HardwareProfile& hw) {
  if (!(n_spikes >= 0.0)) throw InvalidInput("spike count must be non-negative");
  return n_spikes * hw.e_dyn + hw.delta_t * hw.p_stat;
}

EnergyReport report_for_dataset(const snn::SnnModel& model,
                                std::span<const encoding::SpikeTensor> tensors,
                                const HardwareProfile& hw, bool include_input_spikes,
                                std::size_t jobs) {
  hw.validate();
  if (tensors.empty()) throw InvalidInput("energy report needs at least one input");
  if (!model.quantized) throw MissingQuantizedWeights("model has no quantized weights");

  std::vector<std::size_t> counts(tensors.size());
  train::parallel_for(tensors.size(), jobs, [&](std::size_t i) {
    const auto r = snn::forward(model, tensors[i], true);
    counts[i] = include_input_spikes ? r.trace.total_spikes
                                     : r.trace.total_spikes - r.trace.input_spikes;
  });

  EnergyReport rep;
  rep.examples = tensors.size();
  rep.include_input_spikes = include_input_spikes;
  double sum = 0.0;
  for (std::size_t c : counts) {
    rep.n_spikes_max = std::max(rep.n_spikes_max, c);
    sum += static_cast<double>(c);
  }
  rep.n_spikes_mean = sum / static_cast<double>(counts.size());
  rep.e_c_max = energy_per_classification(static_cast<double>(rep.n_spikes_max), hw);
  rep.e_c_mean = energy_per_classification(rep.n_spikes_mean, hw);
  rep.static_floor = hw.delta_t * hw.p_stat;
  return rep;
}

}  // namespace spikeradar::energy
