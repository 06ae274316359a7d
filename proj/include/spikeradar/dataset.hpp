#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spikeradar/container.hpp"
#include "spikeradar/dsp_rangedoppler.hpp"
#include "spikeradar/dsp_udoppler.hpp"
#include "spikeradar/encoding.hpp"

namespace spikeradar::data {

inline constexpr int kDatasetSchemaVersion = 1;

enum class PipelineKind { udoppler, rangedoppler };

const char* pipeline_name(PipelineKind kind);
PipelineKind parse_pipeline(const std::string& name);

using Payload = std::variant<dsp::MicroDopplerMap, dsp::RangeDopplerSequence, encoding::SpikeTensor>;

struct LabeledExample {
  Payload payload;
  std::size_t label = 0;
  std::string acquisition_id;
  std::size_t segment_index = 0;
};

struct DatasetManifest {
  int schema_version = kDatasetSchemaVersion;
  std::vector<std::string> class_names;
  std::vector<std::size_t> class_counts;
  PipelineKind pipeline = PipelineKind::udoppler;
  std::string provenance = "real";  // "real" | "synthetic"
  std::optional<std::uint64_t> seed;
  bool balanced = false;
  nlohmann::json extra = nlohmann::json::object();
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledExample> examples;
};

// Container conversion for a single payload. Maps are stored as f32
// (time, doppler), range-Doppler sequences as f32 (frame, range, doppler) and
// spike tensors as u1 (time, channel, height, width).
io::StoredTensor payload_to_tensor(const Payload& payload);
Payload tensor_to_payload(io::StoredTensor tensor, PipelineKind pipeline, const std::string& name);
const char* payload_extension(const Payload& payload);

std::vector<std::size_t> class_counts(std::span<const LabeledExample> examples,
                                      std::size_t num_classes);

// Writes manifest.json plus one container file per example. Class counts and
// the balanced flag are recomputed from the examples.
void export_dataset(const std::filesystem::path& dir, const Dataset& dataset);

// Loads a dataset directory. Missing or inconsistent manifest/files raise
// CorruptDataset; payloads of the wrong shape or dtype raise InvalidInput.
// For the range-Doppler pipeline every acquisition must have t_fr >= t_inf.
Dataset ingest_external(const std::filesystem::path& dir, PipelineKind pipeline,
                        std::size_t t_inf = 0);

// Reads only the manifest (used by `dataset info`).
nlohmann::json read_manifest_json(const std::filesystem::path& dir);

// Seeded per-class subsampling to the smallest class; keeps original order.
std::vector<LabeledExample> balance_dataset(const std::vector<LabeledExample>& examples,
                                            std::size_t num_classes, std::uint64_t seed);

// Fold index per example. Classes are dealt round-robin after a seeded
// shuffle, continuing the fold counter across classes, so per-class and total
// fold sizes each differ by at most one.
std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels,
                                          std::size_t num_classes, std::size_t folds,
                                          std::uint64_t seed);

struct SynthConfig {
  std::size_t n_per_class = 120;
  std::size_t n_classes = 5;
  std::uint64_t seed = 7;
  double noise = 0.15;        // bound of uniform additive noise, relative to the track peak
  double variability = 1.0;   // scales per-example phase/amplitude/offset jitter
  std::size_t time_len = 48;
  std::size_t doppler_bins = 0;  // 0: the band width retained by the real pipeline
  std::size_t top_k = 48;
  double track_width = 2.5;   // half-width of a Doppler track, in columns
};

struct SynthResult {
  Dataset dataset;
  double nearest_centroid_accuracy = 0.0;
};

// Deterministic class-dependent micro-Doppler maps in [0, 1], top-k
// thresholded like the real pipeline. Uses mt19937_64 and only IEEE-754
// basic operations, so the output is identical across platforms.
SynthResult synth_udoppler(const SynthConfig& cfg);

// Holdout accuracy of a nearest-centroid classifier (even-index examples
// build centroids, odd-index examples are scored).
double nearest_centroid_accuracy(std::span<const LabeledExample> examples,
                                 std::size_t num_classes);

// Encodes a payload for the network: TTFS for maps, subsample + binarize for
// range-Doppler sequences, identity for spike tensors.
encoding::SpikeTensor to_spike_tensor(const LabeledExample& example, std::size_t t_inf);

}  // namespace spikeradar::data
