#include "spikeradar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "spikeradar/container.hpp"
#include "spikeradar/error.hpp"
#include "spikeradar/random.hpp"

namespace spikeradar::data {

namespace fs = std::filesystem;
using nlohmann::json;

const char* pipeline_name(PipelineKind kind) {
  return kind == PipelineKind::udoppler ? "udoppler" : "rangedoppler";
}

PipelineKind parse_pipeline(const std::string& name) {
  if (name == "udoppler") return PipelineKind::udoppler;
  if (name == "rangedoppler") return PipelineKind::rangedoppler;
  throw InvalidInput("unknown pipeline '" + name + "' (expected udoppler or rangedoppler)");
}

std::vector<std::size_t> class_counts(std::span<const LabeledExample> examples,
                                      std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& e : examples) {
    if (e.label >= num_classes) {
      throw InvalidInput("label " + std::to_string(e.label) + " outside [0, " +
                         std::to_string(num_classes) + ")");
    }
    ++counts[e.label];
  }
  return counts;
}

io::StoredTensor payload_to_tensor(const Payload& payload) {
  if (const auto* map = std::get_if<dsp::MicroDopplerMap>(&payload)) {
    auto t = io::make_real({map->time_len, map->doppler_bins}, {"time", "doppler"}, map->values);
    t.meta = json{{"normalized", map->normalized}};
    return t;
  }
  if (const auto* seq = std::get_if<dsp::RangeDopplerSequence>(&payload)) {
    return io::make_real({seq->t_fr, seq->range_bins, seq->doppler_bins},
                         {"frame", "range", "doppler"}, seq->frames);
  }
  const auto& st = std::get<encoding::SpikeTensor>(payload);
  return io::make_bits({st.t_inf, st.channels, st.height, st.width},
                       {"time", "channel", "height", "width"}, st.bits);
}

Payload tensor_to_payload(io::StoredTensor t, PipelineKind pipeline, const std::string& name) {
  if (t.dtype == io::DType::u1) {
    if (t.shape.size() != 4) throw InvalidInput(name + ": spike tensors must be 4-D");
    encoding::SpikeTensor st;
    st.t_inf = t.shape[0];
    st.channels = t.shape[1];
    st.height = t.shape[2];
    st.width = t.shape[3];
    st.bits = std::move(t.bits);
    return st;
  }
  if (t.dtype != io::DType::f32 && t.dtype != io::DType::f64) {
    throw InvalidInput(name + ": unsupported payload dtype " + io::dtype_name(t.dtype));
  }
  if (pipeline == PipelineKind::udoppler) {
    if (t.shape.size() != 2) throw InvalidInput(name + ": micro-Doppler maps must be 2-D");
    dsp::MicroDopplerMap map;
    map.time_len = t.shape[0];
    map.doppler_bins = t.shape[1];
    map.values = std::move(t.real);
    map.normalized = t.meta.is_object() ? t.meta.value("normalized", true) : true;
    for (double v : map.values) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput(name + ": map values outside [0, 1]");
    }
    return map;
  }
  if (t.shape.size() != 3) throw InvalidInput(name + ": range-Doppler sequences must be 3-D");
  dsp::RangeDopplerSequence seq;
  seq.t_fr = t.shape[0];
  seq.range_bins = t.shape[1];
  seq.doppler_bins = t.shape[2];
  seq.frames = std::move(t.real);
  try {
    dsp::validate(seq);
  } catch (const InvalidInput& e) {
    throw InvalidInput(name + ": " + e.what());
  }
  return seq;
}

const char* payload_extension(const Payload& payload) {
  return std::holds_alternative<encoding::SpikeTensor>(payload) ? ".u1" : ".f32";
}

void export_dataset(const fs::path& dir, const Dataset& dataset) {
  fs::create_directories(dir);
  const auto& m = dataset.manifest;
  const std::size_t n_classes = m.class_names.size();
  const auto counts = class_counts(dataset.examples, n_classes);

  json files = json::array();
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const auto& e = dataset.examples[i];
    char name[64];
    std::snprintf(name, sizeof(name), "example_%05zu%s", i, payload_extension(e.payload));
    io::write_file(dir / name, payload_to_tensor(e.payload));
    files.push_back({{"file", name},
                     {"label", e.label},
                     {"acquisition_id", e.acquisition_id},
                     {"segment_index", e.segment_index}});
  }

  const bool balanced =
      !counts.empty() && std::all_of(counts.begin(), counts.end(),
                                     [&](std::size_t c) { return c == counts.front(); });
  json manifest = {{"schema_version", kDatasetSchemaVersion},
                   {"format", "spikeradar-dataset"},
                   {"pipeline", pipeline_name(m.pipeline)},
                   {"provenance", m.provenance},
                   {"class_names", m.class_names},
                   {"class_counts", counts},
                   {"balanced", balanced},
                   {"extra", m.extra},
                   {"examples", files}};
  if (m.seed) manifest["seed"] = *m.seed;
  io::write_bytes(dir / "manifest.json", manifest.dump(2) + "\n");
}

json read_manifest_json(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::is_directory(dir)) throw CorruptDataset(dir.string() + " is not a directory");
  if (!fs::exists(path)) throw CorruptDataset(dir.string() + " has no manifest.json");
  try {
    return json::parse(io::read_bytes(path));
  } catch (const json::exception& e) {
    throw CorruptDataset(path.string() + ": " + e.what());
  }
}

Dataset ingest_external(const fs::path& dir, PipelineKind pipeline, std::size_t t_inf) {
  const json manifest = read_manifest_json(dir);
  Dataset ds;
  try {
    const int version = manifest.at("schema_version").get<int>();
    if (version != kDatasetSchemaVersion) {
      throw CorruptDataset("unsupported dataset schema version " + std::to_string(version));
    }
    ds.manifest.pipeline = parse_pipeline(manifest.at("pipeline").get<std::string>());
    ds.manifest.provenance = manifest.value("provenance", std::string("real"));
    ds.manifest.class_names = manifest.at("class_names").get<std::vector<std::string>>();
    ds.manifest.class_counts = manifest.at("class_counts").get<std::vector<std::size_t>>();
    ds.manifest.balanced = manifest.value("balanced", false);
    if (manifest.contains("seed")) ds.manifest.seed = manifest["seed"].get<std::uint64_t>();
    if (manifest.contains("extra")) ds.manifest.extra = manifest["extra"];
  } catch (const json::exception& e) {
    throw CorruptDataset("manifest: " + std::string(e.what()));
  } catch (const InvalidInput& e) {
    throw CorruptDataset("manifest: " + std::string(e.what()));
  }
  if (ds.manifest.pipeline != pipeline) {
    throw InvalidInput(std::string("dataset was prepared for the ") +
                       pipeline_name(ds.manifest.pipeline) + " pipeline, not " +
                       pipeline_name(pipeline));
  }

  const std::size_t n_classes = ds.manifest.class_names.size();
  if (!manifest.contains("examples") || !manifest["examples"].is_array() ||
      manifest["examples"].empty()) {
    throw CorruptDataset(dir.string() + ": manifest lists no examples");
  }
  for (const auto& entry : manifest["examples"]) {
    LabeledExample e;
    std::string file;
    try {
      file = entry.at("file").get<std::string>();
      e.label = entry.at("label").get<std::size_t>();
      e.acquisition_id = entry.value("acquisition_id", file);
      e.segment_index = entry.value("segment_index", std::size_t{0});
    } catch (const json::exception& ex) {
      throw CorruptDataset("manifest entry: " + std::string(ex.what()));
    }
    if (e.label >= n_classes) {
      throw CorruptDataset(file + ": label " + std::to_string(e.label) + " has no class name");
    }
    const fs::path path = dir / file;
    if (!fs::exists(path)) throw CorruptDataset("manifest lists missing file " + file);
    e.payload = tensor_to_payload(io::read_file(path), pipeline, file);
    if (t_inf > 0) {
      if (const auto* seq = std::get_if<dsp::RangeDopplerSequence>(&e.payload)) {
        if (seq->t_fr < t_inf) {
          throw InvalidInput("acquisition '" + e.acquisition_id + "' has T_fr = " +
                             std::to_string(seq->t_fr) + " < T_inf = " + std::to_string(t_inf));
        }
      }
    }
    ds.examples.push_back(std::move(e));
  }
  if (class_counts(ds.examples, n_classes) != ds.manifest.class_counts) {
    throw CorruptDataset("manifest class counts do not match the listed files");
  }
  return ds;
}

std::vector<LabeledExample> balance_dataset(const std::vector<LabeledExample>& examples,
                                            std::size_t num_classes, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].label >= num_classes) throw InvalidInput("label outside class range");
    by_class[examples[i].label].push_back(i);
  }
  std::size_t target = std::numeric_limits<std::size_t>::max();
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].empty()) {
      throw InvalidInput("cannot balance: class " + std::to_string(c) + " has no examples");
    }
    target = std::min(target, by_class[c].size());
  }

  std::vector<char> keep(examples.size(), 0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto idx = by_class[c];
    if (idx.size() > target) {
      Rng rng(derive_seed(seed, c));
      rng.shuffle(idx);
      idx.resize(target);
    }
    for (std::size_t i : idx) keep[i] = 1;
  }
  std::vector<LabeledExample> out;
  out.reserve(target * num_classes);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (keep[i]) out.push_back(examples[i]);
  }
  return out;
}

std::vector<std::size_t> stratified_folds(std::span<const std::size_t> labels,
                                          std::size_t num_classes, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("cross-validation needs at least 2 folds");
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw InvalidInput("label outside class range");
    by_class[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].size() < folds) {
      throw StratificationError("class " + std::to_string(c) + " has " +
                                std::to_string(by_class[c].size()) + " examples, fewer than " +
                                std::to_string(folds) + " folds");
    }
  }
  Rng rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t counter = 0;
  for (auto& idx : by_class) {
    rng.shuffle(idx);
    for (std::size_t i : idx) fold[i] = counter++ % folds;
  }
  return fold;
}

namespace {

// sin() from basic arithmetic only, accurate to ~1e-9.
double portable_sin(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  x -= two_pi * std::floor(x / two_pi);      // [0, 2pi)
  if (x > std::numbers::pi) x -= two_pi;     // (-pi, pi]
  if (x > std::numbers::pi / 2) x = std::numbers::pi - x;
  if (x < -std::numbers::pi / 2) x = -std::numbers::pi - x;
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n <= 6; ++n) {
    term *= -x2 / static_cast<double>((2 * n) * (2 * n + 1));
    sum += term;
  }
  return sum;
}

struct TrackTemplate {
  double offset;      // Doppler columns from zero Doppler
  double amplitude;   // swing in columns
  double cycles;      // oscillations per map
  bool mirrored;      // second track at the negated position
  double duty_cycles; // > 0: on/off bursts with this many periods per map
};

TrackTemplate class_template(std::size_t c) {
  switch (c) {
    case 0: return {18.0, 10.0, 1.0, false, 0.0};   // push
    case 1: return {-18.0, 10.0, 1.0, false, 0.0};  // pull
    case 2: return {0.0, 30.0, 2.0, false, 0.0};    // swipe
    case 3: return {0.0, 8.0, 4.0, false, 2.0};     // tap
    case 4: return {16.0, 8.0, 1.5, true, 0.0};     // wave
    default:
      return {static_cast<double>(static_cast<long>((c * 7) % 5) - 2) * 8.0,
              6.0 + static_cast<double>((c * 5) % 20), 1.0 + 0.75 * static_cast<double>(c % 4),
              c % 2 == 1, c % 3 == 0 ? 2.0 : 0.0};
  }
}

std::string class_name(std::size_t c) {
  static const char* names[] = {"push", "pull", "swipe", "tap", "wave"};
  return c < 5 ? names[c] : "class" + std::to_string(c);
}

double bump(double d, double width) {
  const double r = d / width;
  const double q = 1.0 + r * r;
  return 1.0 / (q * q);
}

}  // namespace

SynthResult synth_udoppler(const SynthConfig& cfg) {
  if (cfg.n_classes < 2) throw InvalidInput("synthetic data needs at least 2 classes");
  const std::size_t width =
      cfg.doppler_bins ? cfg.doppler_bins : dsp::band_columns(192, -0.26, 0.26).size();
  const std::size_t height = cfg.time_len;
  if (cfg.top_k > width) throw InvalidInput("top_k exceeds the synthetic map width");
  const double center = static_cast<double>(width / 2);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  Rng rng(cfg.seed);
  SynthResult result;
  auto& ds = result.dataset;
  ds.manifest.pipeline = PipelineKind::udoppler;
  ds.manifest.provenance = "synthetic";
  ds.manifest.seed = cfg.seed;
  for (std::size_t c = 0; c < cfg.n_classes; ++c) ds.manifest.class_names.push_back(class_name(c));

  for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
      TrackTemplate tpl = class_template(c);
      const double var = cfg.variability;
      const double phase = var * rng.uniform(0.0, two_pi);
      tpl.amplitude *= 1.0 + 0.2 * var * rng.uniform(-1.0, 1.0);
      tpl.offset += 3.0 * var * rng.uniform(-1.0, 1.0);
      tpl.cycles *= 1.0 + 0.1 * var * rng.uniform(-1.0, 1.0);
      const double burst_phase = var * rng.uniform(0.0, two_pi);

      dsp::MicroDopplerMap raw;
      raw.time_len = height;
      raw.doppler_bins = width;
      raw.values.assign(height * width, 0.0);
      for (std::size_t t = 0; t < height; ++t) {
        const double tt = static_cast<double>(t) / static_cast<double>(height);
        bool active = true;
        if (tpl.duty_cycles > 0.0) {
          active = portable_sin(two_pi * tpl.duty_cycles * tt + burst_phase) > 0.0;
        }
        const double pos = tpl.offset + tpl.amplitude * portable_sin(two_pi * tpl.cycles * tt + phase);
        for (std::size_t j = 0; j < width; ++j) {
          const double d = static_cast<double>(j) - center;
          double v = 0.0;
          if (active) {
            v = bump(d - pos, cfg.track_width);
            if (tpl.mirrored) v = std::max(v, bump(d + pos, cfg.track_width));
          }
          if (cfg.noise > 0.0) v += cfg.noise * rng.uniform();
          raw.at(t, j) = v;
        }
      }

      dsp::DenoiseConfig dn;
      dn.band_low = -0.5;
      dn.band_high = 0.5;
      dn.top_k = cfg.top_k;
      auto map = dsp::normalize_and_denoise(raw, dn);
      // Stored as f32 on disk; keep the in-memory copy identical.
      for (double& v : map.values) v = static_cast<double>(static_cast<float>(v));

      LabeledExample e;
      e.payload = std::move(map);
      e.label = c;
      e.acquisition_id = "synth-" + class_name(c) + "-" + std::to_string(i);
      e.segment_index = 0;
      ds.examples.push_back(std::move(e));
    }
  }
  ds.manifest.class_counts = class_counts(ds.examples, cfg.n_classes);
  ds.manifest.balanced = true;
  result.nearest_centroid_accuracy = nearest_centroid_accuracy(ds.examples, cfg.n_classes);
  ds.manifest.extra = {{"nearest_centroid_accuracy", result.nearest_centroid_accuracy},
                       {"noise", cfg.noise},
                       {"variability", cfg.variability},
                       {"top_k", cfg.top_k},
                       {"track_width", cfg.track_width},
                       {"generator", "mt19937_64"}};
  return result;
}

double nearest_centroid_accuracy(std::span<const LabeledExample> examples,
                                 std::size_t num_classes) {
  auto values = [](const LabeledExample& e) -> const std::vector<double>& {
    const auto* map = std::get_if<dsp::MicroDopplerMap>(&e.payload);
    if (!map) throw InvalidInput("nearest-centroid baseline needs micro-Doppler maps");
    return map->values;
  };
  if (examples.size() < 2) return 0.0;
  const std::size_t dim = values(examples.front()).size();
  std::vector<std::vector<double>> centroid(num_classes, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(num_classes, 0);
  for (std::size_t i = 0; i < examples.size(); i += 2) {
    const auto& v = values(examples[i]);
    auto& c = centroid[examples[i].label];
    for (std::size_t d = 0; d < dim; ++d) c[d] += v[d];
    ++count[examples[i].label];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (count[c] == 0) continue;
    for (double& x : centroid[c]) x /= static_cast<double>(count[c]);
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 1; i < examples.size(); i += 2) {
    const auto& v = values(examples[i]);
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (count[c] == 0) continue;
      double dist = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = v[d] - centroid[c][d];
        dist += diff * diff;
      }
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    correct += best == examples[i].label;
    ++total;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

encoding::SpikeTensor to_spike_tensor(const LabeledExample& example, std::size_t t_inf) {
  if (const auto* map = std::get_if<dsp::MicroDopplerMap>(&example.payload)) {
    return encoding::ttfs_encode(*map, t_inf);
  }
  if (const auto* seq = std::get_if<dsp::RangeDopplerSequence>(&example.payload)) {
    if (seq->t_fr < t_inf) {
      throw InvalidInput("acquisition '" + example.acquisition_id + "' has T_fr = " +
                         std::to_string(seq->t_fr) + " < T_inf = " + std::to_string(t_inf));
    }
    return encoding::wrap_binary(dsp::binarize(dsp::temporal_subsample(*seq, t_inf)));
  }
  const auto& st = std::get<encoding::SpikeTensor>(example.payload);
  if (st.t_inf != t_inf) {
    throw InvalidInput("stored spike tensor has T_inf = " + std::to_string(st.t_inf) +
                       ", expected " + std::to_string(t_inf));
  }
  return st;
}

}  // namespace spikeradar::data
