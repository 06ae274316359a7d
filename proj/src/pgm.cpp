#include "spikeradar/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spikeradar/container.hpp"
#include "spikeradar/error.hpp"

namespace spikeradar::plot {

namespace fs = std::filesystem;

void write_pgm(const fs::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) {
    throw InvalidInput("image pixel count does not match its size");
  }
  std::string bytes = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                      "\n255\n";
  bytes.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  io::write_bytes(path, bytes);
}

GrayImage read_pgm(const fs::path& path) {
  const std::string bytes = io::read_bytes(path);
  std::istringstream in(bytes);
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || magic != "P5" || maxval != 255) throw InvalidInput("not an 8-bit binary PGM: " + path.string());
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  if (bytes.size() - offset != img.width * img.height) throw InvalidInput("truncated PGM: " + path.string());
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return img;
}

GrayImage map_image(const dsp::MicroDopplerMap& map) {
  GrayImage img;
  img.width = map.doppler_bins;
  img.height = map.time_len;
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = std::clamp(map.values[i], 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return img;
}

std::vector<fs::path> write_tensor_pgms(const fs::path& dir, const encoding::SpikeTensor& tensor,
                                        const std::string& stem) {
  std::vector<fs::path> written;
  for (std::size_t k = 0; k < tensor.t_inf; ++k) {
    for (std::size_t c = 0; c < tensor.channels; ++c) {
      GrayImage img;
      img.width = tensor.width;
      img.height = tensor.height;
      img.pixels.resize(img.width * img.height);
      for (std::size_t y = 0; y < tensor.height; ++y) {
        for (std::size_t x = 0; x < tensor.width; ++x) {
          img.pixels[y * img.width + x] = tensor.at(k, c, y, x) ? 255 : 0;
        }
      }
      char name[64];
      std::snprintf(name, sizeof name, "%s_%02zu_c%02zu.pgm", stem.c_str(), k, c);
      written.push_back(dir / name);
      write_pgm(written.back(), img);
    }
  }
  return written;
}

void write_loss_csv(const fs::path& path, std::span<const std::vector<double>> per_fold_losses) {
  std::string out = "fold,epoch,loss\n";
  char line[96];
  for (std::size_t f = 0; f < per_fold_losses.size(); ++f) {
    for (std::size_t e = 0; e < per_fold_losses[f].size(); ++e) {
      std::snprintf(line, sizeof line, "%zu,%zu,%.9g\n", f, e, per_fold_losses[f][e]);
      out += line;
    }
  }
  io::write_bytes(path, out);
}

}  // namespace spikeradar::plot
