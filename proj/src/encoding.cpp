#include "spikeradar/encoding.hpp"

#include <cmath>
#include <numeric>

#include "spikeradar/error.hpp"

namespace spikeradar::encoding {

std::size_t SpikeTensor::spike_count() const {
  return std::accumulate(bits.begin(), bits.end(), std::size_t{0});
}

std::size_t ttfs_step(double v, std::size_t t_inf) {
  if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("TTFS input outside [0, 1]");
  if (t_inf == 0) throw InvalidInput("T_inf must be positive");
  if (v == 0.0) return 0;
  const auto level = static_cast<std::size_t>(std::floor(v * static_cast<double>(t_inf)));
  const std::size_t step = t_inf - level;
  return step == 0 ? 1 : step;
}

SpikeTensor ttfs_encode(const dsp::MicroDopplerMap& map, std::size_t t_inf) {
  if (map.values.size() != map.time_len * map.doppler_bins) {
    throw InvalidInput("map payload does not match its shape");
  }
  SpikeTensor out(t_inf, 1, map.time_len, map.doppler_bins);
  for (std::size_t y = 0; y < map.time_len; ++y) {
    for (std::size_t x = 0; x < map.doppler_bins; ++x) {
      const std::size_t step = ttfs_step(map.at(y, x), t_inf);
      if (step != 0) out.at(step - 1, 0, y, x) = 1;
    }
  }
  return out;
}

SpikeTensor wrap_binary(const dsp::BinaryRdSequence& seq) {
  SpikeTensor out;
  out.t_inf = seq.t_inf;
  out.channels = 1;
  out.height = seq.range_bins;
  out.width = seq.doppler_bins;
  out.bits = seq.frames;
  return out;
}

dsp::BinaryRdSequence unwrap_binary(const SpikeTensor& tensor) {
  if (tensor.channels != 1) throw InvalidInput("binary range-Doppler tensors have one channel");
  dsp::BinaryRdSequence seq;
  seq.t_inf = tensor.t_inf;
  seq.range_bins = tensor.height;
  seq.doppler_bins = tensor.width;
  seq.frames = tensor.bits;
  return seq;
}

}  // namespace spikeradar::encoding
