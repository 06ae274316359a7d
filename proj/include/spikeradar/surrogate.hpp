#pragma once

#include <cmath>
#include <numbers>

namespace spikeradar::snn {

inline constexpr double kThreshold = 1.0;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

// Gaussian surrogate for dS/dV, evaluated at the distance to threshold.
inline double surrogate_derivative(double distance) {
  return kInvSqrt2Pi * std::exp(-2.0 * distance * distance);
}

// Antiderivative of surrogate_derivative: 0.25 * (1 + erf(sqrt(2) x)).
// Only used to build a differentiable network for gradient checks.
inline double relaxed_spike(double distance) {
  return 0.25 * (1.0 + std::erf(std::numbers::sqrt2 * distance));
}

}  // namespace spikeradar::snn
