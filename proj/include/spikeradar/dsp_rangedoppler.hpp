#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace spikeradar::dsp {

// CFAR-processed range-Doppler magnitudes, [frame][range][doppler].
struct RangeDopplerSequence {
  std::size_t t_fr = 0;
  std::size_t range_bins = 0;
  std::size_t doppler_bins = 0;
  std::vector<double> frames;

  std::size_t frame_size() const { return range_bins * doppler_bins; }
  double at(std::size_t t, std::size_t l, std::size_t m) const {
    return frames[(t * range_bins + l) * doppler_bins + m];
  }
};

struct BinaryRdSequence {
  std::size_t t_inf = 0;
  std::size_t range_bins = 0;
  std::size_t doppler_bins = 0;
  std::vector<std::uint8_t> frames;  // 0/1, [n][range][doppler]

  std::uint8_t at(std::size_t n, std::size_t l, std::size_t m) const {
    return frames[(n * range_bins + l) * doppler_bins + m];
  }
};

// Checks shape consistency, t_fr >= 1 and nonnegative finite magnitudes.
void validate(const RangeDopplerSequence& seq);

// Bin b covers frames [floor(b * t_fr / t_inf), floor((b + 1) * t_fr / t_inf)).
std::vector<std::pair<std::size_t, std::size_t>> subsample_bins(std::size_t t_fr,
                                                                std::size_t t_inf);

// Averages each bin of frames; reduces to the T_inf/T_fr-scaled sum when the
// ratio is an integer.
RangeDopplerSequence temporal_subsample(const RangeDopplerSequence& seq, std::size_t t_inf);

// Bit is set iff the magnitude is strictly positive.
BinaryRdSequence binarize(const RangeDopplerSequence& seq);

}  // namespace spikeradar::dsp
