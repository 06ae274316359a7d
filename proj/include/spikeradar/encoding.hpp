#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spikeradar/dsp_rangedoppler.hpp"
#include "spikeradar/dsp_udoppler.hpp"

namespace spikeradar::encoding {

// Binary spike trains, axis order (time, channel, height, width).
struct SpikeTensor {
  std::size_t t_inf = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  SpikeTensor() = default;
  SpikeTensor(std::size_t t, std::size_t c, std::size_t h, std::size_t w)
      : t_inf(t), channels(c), height(h), width(w), bits(t * c * h * w, 0) {}

  std::size_t step_size() const { return channels * height * width; }
  std::size_t index(std::size_t k, std::size_t c, std::size_t y, std::size_t x) const {
    return ((k * channels + c) * height + y) * width + x;
  }
  std::uint8_t at(std::size_t k, std::size_t c, std::size_t y, std::size_t x) const {
    return bits[index(k, c, y, x)];
  }
  std::uint8_t& at(std::size_t k, std::size_t c, std::size_t y, std::size_t x) {
    return bits[index(k, c, y, x)];
  }
  std::size_t spike_count() const;
};

// 1-based spike step for a pixel value, or 0 for "no spike":
// T - floor(v * T), with 0 clamped to 1.
std::size_t ttfs_step(double v, std::size_t t_inf);

// One spike per nonzero pixel; the map's time axis becomes image height.
SpikeTensor ttfs_encode(const dsp::MicroDopplerMap& map, std::size_t t_inf = 4);

SpikeTensor wrap_binary(const dsp::BinaryRdSequence& seq);
dsp::BinaryRdSequence unwrap_binary(const SpikeTensor& tensor);

}  // namespace spikeradar::encoding
