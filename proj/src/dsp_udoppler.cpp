#include "spikeradar/dsp_udoppler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "spikeradar/error.hpp"
#include "spikeradar/window.hpp"

namespace spikeradar::dsp {

namespace {

// fftw planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void set(std::size_t i, Complex z) {
    in_[i][0] = z.real();
    in_[i][1] = z.imag();
  }
  void execute() { fftw_execute(plan_); }
  Complex out(std::size_t i) const { return {out_[i][0], out_[i][1]}; }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  fftw_complex* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

RadarCube make_radar_cube(std::vector<double> samples, std::size_t n_fast,
                          std::size_t n_chirps_per_frame) {
  if (n_fast == 0 || n_chirps_per_frame == 0 || samples.empty()) {
    throw InvalidInput("radar cube is empty");
  }
  if (samples.size() % n_fast != 0) {
    throw InvalidInput("sample count is not a multiple of the fast-time length");
  }
  const std::size_t n_tot = samples.size() / n_fast;
  if (n_tot % n_chirps_per_frame != 0) {
    throw InvalidInput("chirp count " + std::to_string(n_tot) +
                       " is not a whole number of " +
                       std::to_string(n_chirps_per_frame) + "-chirp frames");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidInput("radar cube contains non-finite samples");
  }
  RadarCube cube;
  cube.n_chirps_per_frame = n_chirps_per_frame;
  cube.n_frames = n_tot / n_chirps_per_frame;
  cube.n_fast = n_fast;
  cube.samples = std::move(samples);
  return cube;
}

RangeProfileSequence compute_range_profiles(const RadarCube& cube, std::size_t fft_len,
                                            bool apply_window) {
  const std::size_t n_tot = cube.total_chirps();
  if (n_tot == 0 || cube.n_fast == 0 || cube.samples.size() != n_tot * cube.n_fast) {
    throw InvalidInput("radar cube is empty or inconsistent");
  }
  for (double v : cube.samples) {
    if (!std::isfinite(v)) throw InvalidInput("radar cube contains non-finite samples");
  }
  if (fft_len == 0) fft_len = next_pow2(cube.n_fast);
  if (fft_len < cube.n_fast) {
    throw InvalidInput("fft_len " + std::to_string(fft_len) +
                       " is shorter than the chirp length " + std::to_string(cube.n_fast));
  }

  std::vector<double> window(cube.n_fast, 1.0);
  if (apply_window) window = blackman_window(cube.n_fast);

  RangeProfileSequence out;
  out.n_chirps = n_tot;
  out.n_bins = fft_len;
  out.profiles.resize(n_tot * fft_len);

  FftPlan fft(fft_len);
  for (std::size_t n = 0; n < n_tot; ++n) {
    const auto chirp = cube.chirp(n);
    for (std::size_t i = 0; i < fft_len; ++i) {
      fft.set(i, i < chirp.size() ? Complex(chirp[i] * window[i], 0.0) : Complex{});
    }
    fft.execute();
    for (std::size_t k = 0; k < fft_len; ++k) out.profiles[n * fft_len + k] = fft.out(k);
  }
  return out;
}

void select_gesture_bin(RangeProfileSequence& profiles, std::size_t bin) {
  if (bin >= profiles.n_bins) {
    throw InvalidInput("gesture range bin " + std::to_string(bin) + " outside [0, " +
                       std::to_string(profiles.n_bins) + ")");
  }
  profiles.gesture_bin = bin;
}

std::size_t max_energy_range_bin(const RangeProfileSequence& profiles) {
  if (profiles.n_chirps < 2) throw InvalidInput("need at least two chirps");
  std::size_t best = 0;
  double best_energy = -1.0;
  for (std::size_t k = 0; k < profiles.n_bins; ++k) {
    double energy = 0.0;
    for (std::size_t n = 1; n < profiles.n_chirps; ++n) {
      energy += std::norm(profiles.at(n, k) - profiles.at(n - 1, k));
    }
    if (energy > best_energy) {
      best_energy = energy;
      best = k;
    }
  }
  return best;
}

std::vector<Complex> dc_removed_sequence(const RangeProfileSequence& profiles) {
  if (profiles.n_chirps < 2) {
    throw InvalidInput("DC removal needs at least two chirps");
  }
  if (profiles.gesture_bin >= profiles.n_bins) {
    throw InvalidInput("gesture range bin outside the range axis");
  }
  std::vector<Complex> out(profiles.n_chirps - 1);
  const std::size_t k = profiles.gesture_bin;
  for (std::size_t n = 1; n < profiles.n_chirps; ++n) {
    out[n - 1] = profiles.at(n, k) - profiles.at(n - 1, k);
  }
  return out;
}

void StftConfig::validate() const {
  if (window_len == 0) throw InvalidInput("STFT window length must be positive");
  if (hop == 0 || hop > window_len) {
    throw InvalidInput("STFT hop must satisfy 1 <= hop <= window length");
  }
}

std::size_t count_stft_frames(std::size_t total_chirps, const StftConfig& cfg) {
  cfg.validate();
  if (total_chirps < cfg.window_len) {
    throw InvalidInput("sequence of " + std::to_string(total_chirps) +
                       " samples is shorter than the STFT window (" +
                       std::to_string(cfg.window_len) + ")");
  }
  return (total_chirps - cfg.n_overlap()) / cfg.hop;
}

MicroDopplerMap stft_magnitude(std::span<const Complex> seq, const StftConfig& cfg) {
  const std::size_t n_t = count_stft_frames(seq.size(), cfg);
  const std::size_t s = cfg.window_len;
  const auto window = hann_window(s);

  MicroDopplerMap map;
  map.time_len = n_t;
  map.doppler_bins = s;
  map.values.assign(n_t * s, 0.0);

  FftPlan fft(s);
  const std::size_t shift = s - s / 2;
  for (std::size_t m = 0; m < n_t; ++m) {
    const std::size_t start = m * cfg.hop;
    for (std::size_t i = 0; i < s; ++i) fft.set(i, seq[start + i] * window[i]);
    fft.execute();
    for (std::size_t j = 0; j < s; ++j) {
      map.values[m * s + j] = std::abs(fft.out((j + shift) % s));
    }
  }
  return map;
}

double doppler_frequency(std::size_t column, std::size_t window_len) {
  return (static_cast<double>(column) - static_cast<double>(window_len / 2)) /
         static_cast<double>(window_len);
}

ColumnRange band_columns(std::size_t window_len, double low, double high) {
  if (!(low >= -0.5 && high <= 0.5 && low <= high)) {
    throw InvalidInput("Doppler band must satisfy -0.5 <= low <= high <= 0.5");
  }
  ColumnRange r{window_len, window_len};
  for (std::size_t j = 0; j < window_len; ++j) {
    const double f = doppler_frequency(j, window_len);
    if (f >= low && f <= high) {
      if (r.first == window_len) r.first = j;
      r.last = j + 1;
    }
  }
  if (r.first == window_len) r = {0, 0};
  return r;
}

std::size_t heuristic_top_k(std::size_t window_len, double low, double high) {
  const double half = std::floor(static_cast<double>(window_len) * (high - low) / 2.0);
  return half >= 1.0 ? static_cast<std::size_t>(half) - 1 : 0;
}

std::vector<MicroDopplerMap> cut_maps(const MicroDopplerMap& map, std::size_t segment_len,
                                      std::size_t head_tail_trim) {
  if (segment_len == 0) throw InvalidInput("segment length must be positive");
  const std::size_t n_seg = map.time_len / segment_len;
  std::vector<MicroDopplerMap> out;
  if (n_seg <= 2 * head_tail_trim) return out;

  const std::size_t row = map.doppler_bins;
  for (std::size_t s = head_tail_trim; s < n_seg - head_tail_trim; ++s) {
    MicroDopplerMap seg;
    seg.time_len = segment_len;
    seg.doppler_bins = row;
    seg.normalized = map.normalized;
    const auto first = map.values.begin() + static_cast<std::ptrdiff_t>(s * segment_len * row);
    seg.values.assign(first, first + static_cast<std::ptrdiff_t>(segment_len * row));
    out.push_back(std::move(seg));
  }
  return out;
}

void keep_top_k(std::span<double> row, std::size_t top_k) {
  if (top_k >= row.size()) return;
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto larger = [&](std::size_t a, std::size_t b) {
    return row[a] > row[b] || (row[a] == row[b] && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k),
                   order.end(), larger);
  for (auto it = order.begin() + static_cast<std::ptrdiff_t>(top_k); it != order.end(); ++it) {
    row[*it] = 0.0;
  }
}

MicroDopplerMap normalize_and_denoise(const MicroDopplerMap& map, const DenoiseConfig& cfg) {
  if (map.normalized) throw InvalidInput("map is already normalized");
  if (map.values.size() != map.time_len * map.doppler_bins) {
    throw InvalidInput("map payload does not match its shape");
  }
  const ColumnRange band = band_columns(map.doppler_bins, cfg.band_low, cfg.band_high);
  if (cfg.top_k > band.size()) {
    throw InvalidInput("top_k " + std::to_string(cfg.top_k) + " exceeds the " +
                       std::to_string(band.size()) + " retained Doppler columns");
  }
  for (double v : map.values) {
    if (!std::isfinite(v)) throw InvalidInput("map contains non-finite values");
  }

  MicroDopplerMap out;
  out.time_len = map.time_len;
  out.doppler_bins = band.size();
  out.normalized = true;
  out.values.assign(out.time_len * out.doppler_bins, 0.0);
  if (map.values.empty()) return out;

  const auto [lo_it, hi_it] = std::minmax_element(map.values.begin(), map.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (range == 0.0) return out;

  for (std::size_t t = 0; t < map.time_len; ++t) {
    for (std::size_t j = 0; j < band.size(); ++j) {
      out.at(t, j) = (map.at(t, band.first + j) - lo) / range;
    }
    keep_top_k({out.values.data() + t * out.doppler_bins, out.doppler_bins}, cfg.top_k);
  }
  return out;
}

UdopplerResult udoppler_pipeline(const RadarCube& cube, const UdopplerConfig& cfg) {
  auto profiles = compute_range_profiles(cube, cfg.fft_len);
  UdopplerResult result;
  if (cfg.range_bin) {
    result.range_bin = *cfg.range_bin;
  } else {
    result.range_bin = max_energy_range_bin(profiles);
    result.range_bin_estimated = true;
  }
  select_gesture_bin(profiles, result.range_bin);

  const auto seq = dc_removed_sequence(profiles);
  const auto spectrogram = stft_magnitude(seq, cfg.stft);
  result.stft_frames = spectrogram.time_len;
  for (const auto& segment : cut_maps(spectrogram, cfg.segment_len, cfg.trim)) {
    result.maps.push_back(normalize_and_denoise(segment, cfg.denoise));
  }
  return result;
}

}  // namespace spikeradar::dsp
