#include "spikeradar/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spikeradar/error.hpp"

namespace spikeradar::io {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename T>
void append_le(std::string& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T load_le(const char* p) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(buf[i], buf[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

std::size_t payload_bytes(DType dtype, std::size_t n) {
  switch (dtype) {
    case DType::f32: return 4 * n;
    case DType::f64: return 8 * n;
    case DType::c64: return 8 * n;
    case DType::u1: return (n + 7) / 8;
    case DType::i8: return n;
  }
  return 0;
}

}  // namespace

const char* dtype_name(DType dtype) {
  switch (dtype) {
    case DType::f32: return "f32";
    case DType::f64: return "f64";
    case DType::c64: return "c64";
    case DType::u1: return "u1";
    case DType::i8: return "i8";
  }
  return "?";
}

DType parse_dtype(const std::string& name) {
  if (name == "f32") return DType::f32;
  if (name == "f64") return DType::f64;
  if (name == "c64") return DType::c64;
  if (name == "u1") return DType::u1;
  if (name == "i8") return DType::i8;
  throw InvalidInput("unknown container dtype '" + name + "'");
}

std::size_t element_count(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::size_t StoredTensor::element_count() const {
  return io::element_count(shape);
}

std::string encode(const StoredTensor& tensor) {
  const std::size_t n = tensor.element_count();
  if (!tensor.axes.empty() && tensor.axes.size() != tensor.shape.size()) {
    throw InvalidInput("axis names do not match tensor rank");
  }
  nlohmann::json header;
  header["dtype"] = dtype_name(tensor.dtype);
  header["shape"] = tensor.shape;
  header["axes"] = tensor.axes;
  header["endianness"] = "little";
  if (!tensor.meta.is_null()) header["meta"] = tensor.meta;

  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + payload_bytes(tensor.dtype, n));

  switch (tensor.dtype) {
    case DType::f32:
      if (tensor.real.size() != n) throw InvalidInput("payload size mismatch");
      for (double v : tensor.real) append_le(out, static_cast<float>(v));
      break;
    case DType::f64:
      if (tensor.real.size() != n) throw InvalidInput("payload size mismatch");
      for (double v : tensor.real) append_le(out, v);
      break;
    case DType::c64:
      if (tensor.complex.size() != n) throw InvalidInput("payload size mismatch");
      for (const auto& z : tensor.complex) {
        append_le(out, static_cast<float>(z.real()));
        append_le(out, static_cast<float>(z.imag()));
      }
      break;
    case DType::u1: {
      if (tensor.bits.size() != n) throw InvalidInput("payload size mismatch");
      unsigned char byte = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (tensor.bits[i]) byte |= static_cast<unsigned char>(0x80u >> (i % 8));
        if (i % 8 == 7) {
          out.push_back(static_cast<char>(byte));
          byte = 0;
        }
      }
      if (n % 8 != 0) out.push_back(static_cast<char>(byte));
      break;
    }
    case DType::i8:
      if (tensor.codes.size() != n) throw InvalidInput("payload size mismatch");
      for (std::int8_t c : tensor.codes) out.push_back(static_cast<char>(c));
      break;
  }
  return out;
}

StoredTensor decode(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw InvalidInput("container: missing header line");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("container: malformed header: ") + e.what());
  }

  StoredTensor t;
  try {
    t.dtype = parse_dtype(header.at("dtype").get<std::string>());
    t.shape = header.at("shape").get<std::vector<std::size_t>>();
    if (header.contains("axes")) t.axes = header["axes"].get<std::vector<std::string>>();
    if (header.value("endianness", std::string("little")) != "little") {
      throw InvalidInput("container: only little-endian payloads are supported");
    }
    if (header.contains("meta")) t.meta = header["meta"];
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("container: bad header field: ") + e.what());
  }

  const std::size_t n = t.element_count();
  const char* p = bytes.data() + newline + 1;
  const std::size_t available = bytes.size() - newline - 1;
  if (available != payload_bytes(t.dtype, n)) {
    throw InvalidInput("container: payload is " + std::to_string(available) +
                       " bytes, header implies " +
                       std::to_string(payload_bytes(t.dtype, n)));
  }

  switch (t.dtype) {
    case DType::f32:
      t.real.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.real[i] = load_le<float>(p + 4 * i);
      break;
    case DType::f64:
      t.real.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.real[i] = load_le<double>(p + 8 * i);
      break;
    case DType::c64:
      t.complex.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        t.complex[i] = {load_le<float>(p + 8 * i), load_le<float>(p + 8 * i + 4)};
      }
      break;
    case DType::u1:
      t.bits.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto byte = static_cast<unsigned char>(p[i / 8]);
        t.bits[i] = (byte >> (7 - i % 8)) & 1u;
      }
      break;
    case DType::i8:
      t.codes.resize(n);
      for (std::size_t i = 0; i < n; ++i) t.codes[i] = static_cast<std::int8_t>(p[i]);
      break;
  }
  return t;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_file(const std::filesystem::path& path, const StoredTensor& tensor) {
  write_bytes(path, encode(tensor));
}

StoredTensor read_file(const std::filesystem::path& path) {
  try {
    return decode(read_bytes(path));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

StoredTensor make_real(std::vector<std::size_t> shape,
                       std::vector<std::string> axes,
                       std::vector<double> values, DType dtype) {
  StoredTensor t;
  t.dtype = dtype;
  t.shape = std::move(shape);
  t.axes = std::move(axes);
  t.real = std::move(values);
  return t;
}

StoredTensor make_complex(std::vector<std::size_t> shape,
                          std::vector<std::string> axes,
                          std::vector<std::complex<double>> values) {
  StoredTensor t;
  t.dtype = DType::c64;
  t.shape = std::move(shape);
  t.axes = std::move(axes);
  t.complex = std::move(values);
  return t;
}

StoredTensor make_bits(std::vector<std::size_t> shape,
                       std::vector<std::string> axes,
                       std::vector<std::uint8_t> bits) {
  StoredTensor t;
  t.dtype = DType::u1;
  t.shape = std::move(shape);
  t.axes = std::move(axes);
  t.bits = std::move(bits);
  return t;
}

StoredTensor make_codes(std::vector<std::size_t> shape,
                        std::vector<std::string> axes,
                        std::vector<std::int8_t> codes) {
  StoredTensor t;
  t.dtype = DType::i8;
  t.shape = std::move(shape);
  t.axes = std::move(axes);
  t.codes = std::move(codes);
  return t;
}

}  // namespace spikeradar::io
