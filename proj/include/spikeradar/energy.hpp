#pragma once

#include <cstddef>
#include <span>

#include "spikeradar/encoding.hpp"
#include "spikeradar/snn.hpp"

namespace spikeradar::energy {

struct HardwareProfile {
  double e_dyn = 2.1e-12;   // joules per spike
  double p_stat = 73e-6;    // watts
  double delta_t = 4e-3;    // seconds per classification window

  void validate() const;
};

// E = n_spikes * e_dyn + delta_t * p_stat
double energy_per_classification(double n_spikes, const HardwareProfile& hw);

struct EnergyReport {
  std::size_t examples = 0;
  std::size_t n_spikes_max = 0;
  double n_spikes_mean = 0.0;
  double e_c_max = 0.0;
  double e_c_mean = 0.0;
  double static_floor = 0.0;  // delta_t * p_stat
  bool include_input_spikes = true;
};

// Runs the quantized forward over every tensor and reports the worst-case and
// mean energy per classification.
EnergyReport report_for_dataset(const snn::SnnModel& model,
                                std::span<const encoding::SpikeTensor> tensors,
                                const HardwareProfile& hw, bool include_input_spikes = true,
                                std::size_t jobs = 1);

}  // namespace spikeradar::energy
