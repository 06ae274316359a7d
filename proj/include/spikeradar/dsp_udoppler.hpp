#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace spikeradar::dsp {

using Complex = std::complex<double>;

// Raw ADC samples of one acquisition, one row per chirp.
struct RadarCube {
  std::size_t n_chirps_per_frame = 192;
  std::size_t n_frames = 0;
  std::size_t n_fast = 0;        // fast-time samples per chirp
  std::vector<double> samples;   // [chirp][fast-time], row-major
  std::optional<double> sample_rate_hz;

  std::size_t total_chirps() const { return n_frames * n_chirps_per_frame; }
  std::span<const double> chirp(std::size_t n) const {
    return {samples.data() + n * n_fast, n_fast};
  }
};

// Builds a cube from a flat [chirp][fast-time] buffer, checking that the
// chirp count is a whole number of frames and all samples are finite.
RadarCube make_radar_cube(std::vector<double> samples, std::size_t n_fast,
                          std::size_t n_chirps_per_frame = 192);

struct RangeProfileSequence {
  std::size_t n_chirps = 0;
  std::size_t n_bins = 0;
  std::vector<Complex> profiles;  // [chirp][range bin]
  std::size_t gesture_bin = 0;

  const Complex& at(std::size_t chirp, std::size_t bin) const {
    return profiles[chirp * n_bins + bin];
  }
};

struct StftConfig {
  std::size_t window_len = 192;
  std::size_t hop = 8;

  std::size_t n_overlap() const { return window_len - hop; }
  void validate() const;
};

// Real-valued time x Doppler map. Columns are Doppler bins.
struct MicroDopplerMap {
  std::size_t time_len = 0;
  std::size_t doppler_bins = 0;
  std::vector<double> values;  // [time][doppler]
  bool normalized = false;

  double at(std::size_t t, std::size_t f) const { return values[t * doppler_bins + f]; }
  double& at(std::size_t t, std::size_t f) { return values[t * doppler_bins + f]; }
};

std::size_t next_pow2(std::size_t n);

// Blackman-windowed, zero-padded DFT of every chirp. fft_len = 0 selects the
// next power of two >= fast-time length. apply_window = false is for tests.
RangeProfileSequence compute_range_profiles(const RadarCube& cube,
                                            std::size_t fft_len = 0,
                                            bool apply_window = true);

void select_gesture_bin(RangeProfileSequence& profiles, std::size_t bin);

// Helper: the range bin with the most slow-time energy after DC
// removal. Used only when no gesture bin is configured.
std::size_t max_energy_range_bin(const RangeProfileSequence& profiles);

// First difference along slow time at the gesture bin (length n_chirps - 1).
std::vector<Complex> dc_removed_sequence(const RangeProfileSequence& profiles);

std::size_t count_stft_frames(std::size_t total_chirps, const StftConfig& cfg);

// |STFT| with a Hann window over fully contained windows only. Output is
// count_stft_frames(len) x window_len with zero Doppler at column
// window_len / 2.
MicroDopplerMap stft_magnitude(std::span<const Complex> seq, const StftConfig& cfg);

// Normalized frequency of Doppler column j on the centered axis.
double doppler_frequency(std::size_t column, std::size_t window_len);

struct ColumnRange {
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
  std::size_t size() const { return last - first; }
};

// Columns j with low <= doppler_frequency(j) <= high.
ColumnRange band_columns(std::size_t window_len, double low, double high);

// floor(s * (high - low) / 2) - 1: the soft-threshold k heuristic.
std::size_t heuristic_top_k(std::size_t window_len, double low, double high);

std::vector<MicroDopplerMap> cut_maps(const MicroDopplerMap& map,
                                      std::size_t segment_len = 48,
                                      std::size_t head_tail_trim = 6);

struct DenoiseConfig {
  double band_low = -0.26;
  double band_high = 0.26;
  std::size_t top_k = 48;
};

// Min-max normalize the whole segment, keep the Doppler band, then keep the
// top_k values of every row (ties to the lower column).
MicroDopplerMap normalize_and_denoise(const MicroDopplerMap& map,
                                      const DenoiseConfig& cfg = {});

// Keeps the top_k largest entries of a row, zeroing the rest.
void keep_top_k(std::span<double> row, std::size_t top_k);

struct UdopplerConfig {
  std::size_t fft_len = 0;
  std::optional<std::size_t> range_bin;
  StftConfig stft;
  DenoiseConfig denoise;
  std::size_t segment_len = 48;
  std::size_t trim = 6;
};

struct UdopplerResult {
  std::vector<MicroDopplerMap> maps;
  std::size_t range_bin = 0;
  bool range_bin_estimated = false;
  std::size_t stft_frames = 0;
};

UdopplerResult udoppler_pipeline(const RadarCube& cube, const UdopplerConfig& cfg);

}  // namespace spikeradar::dsp
