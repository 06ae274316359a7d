#pragma once

#include <cstddef>
#include <vector>

namespace spikeradar::dsp {

// Periodic (DFT-even) windows divide by n; symmetric ones by n - 1.
std::vector<double> blackman_window(std::size_t n, bool periodic = true);
std::vector<double> hann_window(std::size_t n, bool periodic = true);

}  // namespace spikeradar::dsp
