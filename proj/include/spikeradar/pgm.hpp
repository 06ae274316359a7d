#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spikeradar/dsp_udoppler.hpp"
#include "spikeradar/encoding.hpp"

namespace spikeradar::plot {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Binary (P5) 8-bit PGM.
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// Rows are time, columns are Doppler bins; a value v in [0, 1] becomes
// round(255 v). Values outside [0, 1] are clamped.
GrayImage map_image(const dsp::MicroDopplerMap& map);

// One image per (step, channel); spikes are white.
std::vector<std::filesystem::path> write_tensor_pgms(const std::filesystem::path& dir,
                                                     const encoding::SpikeTensor& tensor,
                                                     const std::string& stem = "step");

// Columns: fold, epoch, loss.
void write_loss_csv(const std::filesystem::path& path,
                    std::span<const std::vector<double>> per_fold_losses);

}  // namespace spikeradar::plot
