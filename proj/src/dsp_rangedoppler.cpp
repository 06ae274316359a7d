#include "spikeradar/dsp_rangedoppler.hpp"

#include <cmath>
#include <string>

#include "spikeradar/error.hpp"

namespace spikeradar::dsp {

void validate(const RangeDopplerSequence& seq) {
  if (seq.t_fr == 0) throw InvalidInput("range-Doppler sequence has no frames");
  if (seq.frames.size() != seq.t_fr * seq.frame_size()) {
    throw InvalidInput("range-Doppler payload does not match its shape");
  }
  for (double v : seq.frames) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("range-Doppler magnitudes must be finite and nonnegative");
    }
  }
}

std::vector<std::pair<std::size_t, std::size_t>> subsample_bins(std::size_t t_fr,
                                                                std::size_t t_inf) {
  if (t_inf == 0) throw InvalidInput("T_inf must be positive");
  if (t_inf > t_fr) {
    throw InvalidInput("T_fr = " + std::to_string(t_fr) + " is shorter than T_inf = " +
                       std::to_string(t_inf));
  }
  std::vector<std::pair<std::size_t, std::size_t>> bins(t_inf);
  for (std::size_t b = 0; b < t_inf; ++b) {
    bins[b] = {b * t_fr / t_inf, (b + 1) * t_fr / t_inf};
  }
  return bins;
}

RangeDopplerSequence temporal_subsample(const RangeDopplerSequence& seq, std::size_t t_inf) {
  validate(seq);
  const auto bins = subsample_bins(seq.t_fr, t_inf);
  const std::size_t frame = seq.frame_size();

  RangeDopplerSequence out;
  out.t_fr = t_inf;
  out.range_bins = seq.range_bins;
  out.doppler_bins = seq.doppler_bins;
  out.frames.assign(t_inf * frame, 0.0);

  for (std::size_t b = 0; b < t_inf; ++b) {
    const auto [first, last] = bins[b];
    double* dst = out.frames.data() + b * frame;
    for (std::size_t t = first; t < last; ++t) {
      const double* src = seq.frames.data() + t * frame;
      for (std::size_t i = 0; i < frame; ++i) dst[i] += src[i];
    }
    const double count = static_cast<double>(last - first);
    for (std::size_t i = 0; i < frame; ++i) dst[i] /= count;
  }
  return out;
}

BinaryRdSequence binarize(const RangeDopplerSequence& seq) {
  if (seq.frames.size() != seq.t_fr * seq.frame_size()) {
    throw InvalidInput("range-Doppler payload does not match its shape");
  }
  BinaryRdSequence out;
  out.t_inf = seq.t_fr;
  out.range_bins = seq.range_bins;
  out.doppler_bins = seq.doppler_bins;
  out.frames.resize(seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    out.frames[i] = seq.frames[i] > 0.0 ? 1 : 0;
  }
  return out;
}

}  // namespace spikeradar::dsp
