#pragma once

namespace spikeradar::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kRunRecordSchemaVersion = 1;

// Exit codes: 0 success, 1 internal error, 2 invalid input or usage error,
// 3 corrupt dataset.
int run(int argc, char** argv);

}  // namespace spikeradar::cli
