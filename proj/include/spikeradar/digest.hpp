#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace spikeradar {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Digest over every regular file below `dir`, visited in sorted relative-path
// order; each file contributes its relative path and its own digest.
std::string sha256_tree(const std::filesystem::path& dir);

}  // namespace spikeradar
