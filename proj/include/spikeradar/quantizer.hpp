#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spikeradar::quant {

// Per-tensor symmetric uniform quantization. Codes lie in
// [-(2^(b-1) - 1), 2^(b-1) - 1]; there is no -2^(b-1) code.
struct QuantizedTensor {
  std::vector<std::int8_t> codes;
  double scale = 1.0;
  int bits = 0;
};

int max_code(int bits);

// scale = max|w| / max_code(bits); codes = round half away from zero.
// An all-zero tensor gets scale 1 and zero codes.
QuantizedTensor quantize(std::span<const double> weights, int bits);

std::vector<double> dequantize(const QuantizedTensor& q);

}  // namespace spikeradar::quant
