#include "spikeradar/digest.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "spikeradar/container.hpp"
#include "spikeradar/error.hpp"

namespace spikeradar {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(io::read_bytes(path)); }

std::string sha256_tree(const fs::path& dir) {
  if (fs::is_regular_file(dir)) return sha256_file(dir);
  std::vector<std::string> rel;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), dir).generic_string());
  }
  std::sort(rel.begin(), rel.end());
  std::string listing;
  for (const auto& r : rel) listing += r + "  " + sha256_file(dir / r) + "\n";
  return sha256_hex(listing);
}

}  // namespace spikeradar
