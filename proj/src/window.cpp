#include "spikeradar/window.hpp"

#include <cmath>
#include <numbers>

namespace spikeradar::dsp {

namespace {

double window_denominator(std::size_t n, bool periodic) {
  if (periodic) return static_cast<double>(n);
  return n > 1 ? static_cast<double>(n - 1) : 1.0;
}

}  // namespace

std::vector<double> blackman_window(std::size_t n, bool periodic) {
  std::vector<double> w(n);
  const double denom = window_denominator(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / denom;
    w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
  }
  if (n == 1) w[0] = 1.0;
  return w;
}

std::vector<double> hann_window(std::size_t n, bool periodic) {
  std::vector<double> w(n);
  const double denom = window_denominator(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / denom;
    w[i] = 0.5 - 0.5 * std::cos(x);
  }
  if (n == 1) w[0] = 1.0;
  return w;
}

}  // namespace spikeradar::dsp
