#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace spikeradar::io {

// Tensor container: one compact JSON header line, '\n', then the raw
// little-endian payload. Complex values are interleaved (re, im); u1 is
// packed 8 per byte, MSB first, row-major, with the last byte zero-padded.
enum class DType { f32, f64, c64, u1, i8 };

const char* dtype_name(DType dtype);
DType parse_dtype(const std::string& name);

struct StoredTensor {
  DType dtype = DType::f32;
  std::vector<std::size_t> shape;
  std::vector<std::string> axes;
  nlohmann::json meta;  // optional, null when absent

  // Exactly one of these is populated, according to dtype.
  std::vector<double> real;                   // f32, f64
  std::vector<std::complex<double>> complex;  // c64
  std::vector<std::uint8_t> bits;             // u1 (one byte per element, 0/1)
  std::vector<std::int8_t> codes;             // i8

  std::size_t element_count() const;
};

std::size_t element_count(std::span<const std::size_t> shape);

std::string encode(const StoredTensor& tensor);
StoredTensor decode(const std::string& bytes);

void write_file(const std::filesystem::path& path, const StoredTensor& tensor);
StoredTensor read_file(const std::filesystem::path& path);

StoredTensor make_real(std::vector<std::size_t> shape,
                       std::vector<std::string> axes,
                       std::vector<double> values, DType dtype = DType::f32);
StoredTensor make_complex(std::vector<std::size_t> shape,
                          std::vector<std::string> axes,
                          std::vector<std::complex<double>> values);
StoredTensor make_bits(std::vector<std::size_t> shape,
                       std::vector<std::string> axes,
                       std::vector<std::uint8_t> bits);
StoredTensor make_codes(std::vector<std::size_t> shape,
                        std::vector<std::string> axes,
                        std::vector<std::int8_t> codes);

std::string read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace spikeradar::io
