#include "spikeradar/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spikeradar/error.hpp"

namespace spikeradar::quant {

int max_code(int bits) { return (1 << (bits - 1)) - 1; }

QuantizedTensor quantize(std::span<const double> weights, int bits) {
  if (bits < 2 || bits > 8) {
    throw InvalidInput("quantization bit width " + std::to_string(bits) + " outside [2, 8]");
  }
  double max_abs = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw InvalidInput("cannot quantize non-finite weights");
    max_abs = std::max(max_abs, std::fabs(w));
  }

  QuantizedTensor q;
  q.bits = bits;
  q.codes.assign(weights.size(), 0);
  if (max_abs == 0.0) {
    q.scale = 1.0;
    return q;
  }
  const int limit = max_code(bits);
  q.scale = max_abs / limit;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    // std::round rounds halfway cases away from zero.
    const double c = std::round(weights[i] / q.scale);
    q.codes[i] = static_cast<std::int8_t>(std::clamp(c, -double(limit), double(limit)));
  }
  return q;
}

std::vector<double> dequantize(const QuantizedTensor& q) {
  std::vector<double> out(q.codes.size());
  for (std::size_t i = 0; i < q.codes.size(); ++i) out[i] = q.codes[i] * q.scale;
  return out;
}

}  // namespace spikeradar::quant
