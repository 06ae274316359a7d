#include "spikeradar/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spikeradar/container.hpp"
#include "spikeradar/dataset.hpp"
#include "spikeradar/digest.hpp"
#include "spikeradar/dsp_rangedoppler.hpp"
#include "spikeradar/dsp_udoppler.hpp"
#include "spikeradar/encoding.hpp"
#include "spikeradar/energy.hpp"
#include "spikeradar/error.hpp"
#include "spikeradar/model_io.hpp"
#include "spikeradar/pgm.hpp"
#include "spikeradar/random.hpp"
#include "spikeradar/snn.hpp"
#include "spikeradar/training.hpp"

namespace spikeradar::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool verbose = false;
};

// Collects what a run read and wrote and emits it as run_record JSON.
class RunRecord {
 public:
  RunRecord(std::string command, const GlobalOptions& g, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {
    config_ = json::object();
    jobs_ = g.jobs;
  }

  json& config() { return config_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_input(const fs::path& p) { inputs_[p.string()] = sha256_tree(p); }
  void add_output(const fs::path& p) { outputs_.push_back(p); }
  void add_timing(const std::string& name, double seconds) { timings_[name] = seconds; }

  void write(const fs::path& path) {
    json out_digests = json::object();
    for (const auto& p : outputs_) out_digests[p.string()] = sha256_tree(p);
    timings_["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j = {{"schema_version", kRunRecordSchemaVersion},
              {"tool", "spikeradar"},
              {"tool_version", kToolVersion},
              {"command", command_},
              {"argv", argv_},
              {"config", config_},
              {"jobs", jobs_},
              {"input_digests", inputs_},
              {"output_digests", out_digests},
              {"timings", timings_}};
    j["seed"] = seed_ ? json(*seed_) : json(nullptr);
    io::write_bytes(path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::chrono::steady_clock::time_point start_;
  json config_;
  std::optional<std::uint64_t> seed_;
  std::size_t jobs_ = 1;
  json inputs_ = json::object();
  std::vector<fs::path> outputs_;
  json timings_ = json::object();
};

// Run records for file outputs sit next to the file.
fs::path record_path_for_file(const fs::path& out) {
  return out.parent_path() / (out.filename().string() + ".run_record.json");
}

void write_json(const fs::path& path, const json& j) { io::write_bytes(path, j.dump(2) + "\n"); }

data::PipelineKind dataset_pipeline(const fs::path& dir, const std::string& requested) {
  if (!requested.empty()) return data::parse_pipeline(requested);
  const json m = data::read_manifest_json(dir);
  if (!m.contains("pipeline") || !m["pipeline"].is_string()) {
    throw CorruptDataset(dir.string() + ": manifest has no pipeline");
  }
  return data::parse_pipeline(m["pipeline"].get<std::string>());
}

json fold_report_json(const train::FoldReport& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"train_size", f.train_size},
                     {"validation_size", f.validation_size},
                     {"accuracy", f.accuracy},
                     {"epoch_loss", f.epoch_loss}});
  }
  return {{"schema_version", 1},
          {"kind", "fold_report"},
          {"folds", folds},
          {"mean_accuracy", r.mean_accuracy},
          {"std_accuracy", r.std_accuracy},
          {"confusion", r.confusion},
          {"best_fold", r.best_fold}};
}

encoding::SpikeTensor load_network_input(const fs::path& path, std::size_t t_inf) {
  io::StoredTensor t = io::read_file(path);
  if (t.dtype == io::DType::u1) {
    return std::get<encoding::SpikeTensor>(
        data::tensor_to_payload(std::move(t), data::PipelineKind::udoppler, path.string()));
  }
  auto payload = data::tensor_to_payload(std::move(t), data::PipelineKind::udoppler, path.string());
  return encoding::ttfs_encode(std::get<dsp::MicroDopplerMap>(payload), t_inf);
}

// ---------------------------------------------------------------------------

struct UdopplerArgs {
  std::string input, out;
  std::optional<std::size_t> range_bin;
  std::size_t window = 192, hop = 8, topk = 48, segment = 48, trim = 6;
  std::vector<double> band{-0.26, 0.26};
  std::size_t chirps_per_frame = 192;
  std::size_t fft_len = 0;
  bool export_pgm = false;
};

int cmd_dsp_udoppler(const UdopplerArgs& a, RunRecord& rec) {
  io::StoredTensor t = io::read_file(a.input);
  if (t.dtype != io::DType::f32 && t.dtype != io::DType::f64) {
    throw InvalidInput("radar cube must hold real f32/f64 samples");
  }
  if (t.shape.size() != 2) throw InvalidInput("radar cube must be 2-D (chirp, fast_time)");
  std::size_t cpf = a.chirps_per_frame;
  if (t.meta.is_object() && t.meta.contains("chirps_per_frame")) {
    cpf = t.meta["chirps_per_frame"].get<std::size_t>();
  }
  const dsp::RadarCube cube = dsp::make_radar_cube(std::move(t.real), t.shape[1], cpf);

  if (a.band.size() != 2) throw InvalidInput("--band takes two values");
  dsp::UdopplerConfig cfg;
  cfg.fft_len = a.fft_len;
  cfg.range_bin = a.range_bin;
  cfg.stft.window_len = a.window;
  cfg.stft.hop = a.hop;
  cfg.denoise.band_low = a.band[0];
  cfg.denoise.band_high = a.band[1];
  cfg.denoise.top_k = a.topk;
  cfg.segment_len = a.segment;
  cfg.trim = a.trim;
  const auto result = dsp::udoppler_pipeline(cube, cfg);

  const fs::path out(a.out);
  fs::create_directories(out);
  for (std::size_t i = 0; i < result.maps.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "map_%03zu", i);
    const fs::path p = out / (std::string(name) + ".f32");
    io::write_file(p, data::payload_to_tensor(result.maps[i]));
    rec.add_output(p);
    if (a.export_pgm) {
      const fs::path img = out / (std::string(name) + ".pgm");
      plot::write_pgm(img, plot::map_image(result.maps[i]));
      rec.add_output(img);
    }
  }
  rec.config() = {{"range_bin", result.range_bin},
                  {"range_bin_estimated", result.range_bin_estimated},
                  {"window", a.window},
                  {"hop", a.hop},
                  {"band", a.band},
                  {"topk", a.topk},
                  {"segment", a.segment},
                  {"trim", a.trim},
                  {"chirps_per_frame", cpf},
                  {"fft_len", a.fft_len},
                  {"stft_frames", result.stft_frames},
                  {"maps", result.maps.size()}};
  rec.add_input(a.input);
  rec.write(out / "run_record.json");
  std::printf("%zu maps written to %s (range bin %zu%s)\n", result.maps.size(), a.out.c_str(),
              result.range_bin, result.range_bin_estimated ? ", estimated" : "");
  return 0;
}

int cmd_dsp_rangedoppler(const std::string& input, std::size_t tinf, const std::string& out,
                         RunRecord& rec) {
  auto payload = data::tensor_to_payload(io::read_file(input), data::PipelineKind::rangedoppler, input);
  const auto& seq = std::get<dsp::RangeDopplerSequence>(payload);
  const auto binary = dsp::binarize(dsp::temporal_subsample(seq, tinf));
  const auto tensor = encoding::wrap_binary(binary);
  io::write_file(out, data::payload_to_tensor(tensor));
  rec.config() = {{"tinf", tinf}, {"t_fr", seq.t_fr}};
  rec.add_input(input);
  rec.add_output(out);
  rec.write(record_path_for_file(out));
  std::printf("%zu spikes over %zu steps written to %s\n", tensor.spike_count(), tinf, out.c_str());
  return 0;
}

int cmd_encode_ttfs(const std::string& input, std::size_t tinf, const std::string& out,
                    RunRecord& rec) {
  rec.config() = {{"tinf", tinf}};
  rec.add_input(input);
  if (fs::is_directory(input)) {
    auto ds = data::ingest_external(input, data::PipelineKind::udoppler);
    for (auto& e : ds.examples) e.payload = data::to_spike_tensor(e, tinf);
    ds.manifest.extra["encoding"] = {{"kind", "ttfs"}, {"tinf", tinf}};
    data::export_dataset(out, ds);
    rec.add_output(out);
    rec.write(fs::path(out) / "run_record.json");
    std::printf("%zu examples encoded into %s\n", ds.examples.size(), out.c_str());
    return 0;
  }
  auto payload = data::tensor_to_payload(io::read_file(input), data::PipelineKind::udoppler, input);
  const auto tensor = encoding::ttfs_encode(std::get<dsp::MicroDopplerMap>(payload), tinf);
  io::write_file(out, data::payload_to_tensor(tensor));
  rec.add_output(out);
  rec.write(record_path_for_file(out));
  std::printf("%zu spikes written to %s\n", tensor.spike_count(), out.c_str());
  return 0;
}

int cmd_synth(const data::SynthConfig& cfg, const std::string& out, RunRecord& rec) {
  const auto r = data::synth_udoppler(cfg);
  data::export_dataset(out, r.dataset);
  rec.config() = {{"classes", cfg.n_classes},
                  {"per_class", cfg.n_per_class},
                  {"noise", cfg.noise},
                  {"variability", cfg.variability},
                  {"track_width", cfg.track_width},
                  {"time_len", cfg.time_len},
                  {"doppler_bins", r.dataset.examples.empty()
                                       ? 0
                                       : std::get<dsp::MicroDopplerMap>(r.dataset.examples[0].payload)
                                             .doppler_bins},
                  {"top_k", cfg.top_k}};
  rec.set_seed(cfg.seed);
  rec.add_output(out);
  rec.write(fs::path(out) / "run_record.json");
  std::printf("%zu synthetic examples written to %s (nearest-centroid accuracy %.3f)\n",
              r.dataset.examples.size(), out.c_str(), r.nearest_centroid_accuracy);
  return 0;
}

int cmd_dataset_info(const std::string& dir) {
  const json m = data::read_manifest_json(dir);
  json info = json::object();
  for (const char* key : {"schema_version", "format", "pipeline", "provenance", "seed", "class_names",
                          "class_counts", "balanced", "extra"}) {
    if (m.contains(key)) info[key] = m[key];
  }
  info["examples"] = m.contains("examples") ? m["examples"].size() : 0;
  std::cout << info.dump(2) << "\n";
  return 0;
}

struct TrainArgs {
  std::string dataset, out, pipeline, neuron = "compare_then_integrate";
  std::size_t tinf = 4;
  int bits = 4;
  std::size_t folds = 6, epochs = 14, qat_epochs = 1, batch = 128, hidden = 128, fold_limit = 0;
  double lr = 1e-3;
  double init_gain = snn::kDefaultInitGain;
  bool balance = false;
};

int cmd_train(const TrainArgs& a, const GlobalOptions& g, RunRecord& rec) {
  const auto pipeline = dataset_pipeline(a.dataset, a.pipeline);
  auto ds = data::ingest_external(a.dataset, pipeline,
                                  pipeline == data::PipelineKind::rangedoppler ? a.tinf : 0);
  const std::uint64_t seed = g.seed.value_or(0);
  const std::size_t n_classes = ds.manifest.class_names.size();
  if (a.balance) ds.examples = data::balance_dataset(ds.examples, n_classes, derive_seed(seed, 1));

  train::TrainingSet set;
  set.num_classes = n_classes;
  for (const auto& e : ds.examples) {
    set.inputs.push_back(data::to_spike_tensor(e, a.tinf));
    set.labels.push_back(e.label);
  }
  const auto& first = set.inputs.front();
  for (const auto& x : set.inputs) {
    if (x.t_inf != a.tinf || x.channels != first.channels || x.height != first.height ||
        x.width != first.width) {
      throw InvalidInput("dataset examples do not share one input shape with T_inf = " +
                         std::to_string(a.tinf));
    }
  }

  snn::ArchitectureConfig arch;
  arch.input = {first.channels, first.height, first.width};
  arch.hidden = a.hidden;
  arch.classes = n_classes;
  const auto model = snn::make_model(arch, a.tinf, snn::parse_neuron_mode(a.neuron));

  train::TrainConfig cfg;
  cfg.adam.lr = a.lr;
  cfg.batch = a.batch;
  cfg.epochs_full = a.epochs;
  cfg.epochs_qat = a.qat_epochs;
  cfg.folds = a.folds;
  cfg.fold_limit = a.fold_limit;
  cfg.bits = a.bits;
  cfg.init_gain = a.init_gain;
  cfg.seed = seed;
  cfg.jobs = g.jobs;
  cfg.verbose = g.verbose;

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = train::train(model, set, cfg);
  rec.add_timing("train_seconds",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  json resolved = {{"dataset", a.dataset},
                   {"pipeline", data::pipeline_name(pipeline)},
                   {"tinf", a.tinf},
                   {"bits", a.bits},
                   {"folds", a.folds},
                   {"fold_limit", a.fold_limit},
                   {"epochs", a.epochs},
                   {"qat_epochs", a.qat_epochs},
                   {"batch", a.batch},
                   {"lr", a.lr},
                   {"hidden", a.hidden},
                   {"init_gain", a.init_gain},
                   {"neuron_mode", a.neuron},
                   {"balance", a.balance},
                   {"adam", {{"beta1", cfg.adam.beta1}, {"beta2", cfg.adam.beta2}, {"eps", cfg.adam.eps}}}};
  const fs::path out(a.out);
  json info = {{"pipeline", data::pipeline_name(pipeline)},
               {"class_names", ds.manifest.class_names},
               {"dataset_provenance", ds.manifest.provenance},
               {"training", resolved},
               {"seed", seed},
               {"best_fold", result.report.best_fold},
               {"mean_accuracy", result.report.mean_accuracy}};
  model_io::save_model(out, result.model, info);
  write_json(out / "fold_report.json", fold_report_json(result.report));
  std::vector<std::vector<double>> losses;
  for (const auto& f : result.report.folds) losses.push_back(f.epoch_loss);
  plot::write_loss_csv(out / "loss_curves.csv", losses);

  rec.config() = resolved;
  rec.set_seed(seed);
  rec.add_input(a.dataset);
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().filename() != "run_record.json") rec.add_output(e.path());
  }
  rec.write(out / "run_record.json");
  std::printf("mean fold accuracy %.4f +- %.4f over %zu folds (%s data); model written to %s\n",
              result.report.mean_accuracy, result.report.std_accuracy, result.report.folds.size(),
              ds.manifest.provenance.c_str(), a.out.c_str());
  return 0;
}

int cmd_infer(const std::string& model_dir, const std::string& input, bool quantized,
              const std::string& trace_out, RunRecord& rec) {
  const auto model = model_io::load_model(model_dir);
  const auto x = load_network_input(input, model.t_inf);
  const auto r = snn::forward(model, x, quantized, !trace_out.empty());
  const std::size_t pred = snn::argmax(r.probabilities);
  json result = {{"predicted_class", pred}, {"probabilities", r.probabilities}};
  const json manifest = model_io::read_model_manifest(model_dir);
  if (manifest.contains("info") && manifest["info"].contains("class_names")) {
    const auto& names = manifest["info"]["class_names"];
    if (pred < names.size()) result["predicted_name"] = names[pred];
  }
  std::cout << result.dump() << "\n";
  if (!trace_out.empty()) {
    json trace = {{"schema_version", 1},
                  {"kind", "inference_trace"},
                  {"quantized", quantized},
                  {"t_inf", model.t_inf},
                  {"accumulator", r.trace.accumulator},
                  {"probabilities", r.probabilities},
                  {"predicted_class", pred},
                  {"input_spikes", r.trace.input_spikes},
                  {"layer_spikes", r.trace.layer_spikes},
                  {"total_spikes", r.trace.total_spikes},
                  {"per_step_spikes", r.trace.per_step_spikes}};
    write_json(trace_out, trace);
    rec.config() = {{"quantized", quantized}};
    rec.add_input(model_dir);
    rec.add_input(input);
    rec.add_output(trace_out);
    rec.write(record_path_for_file(trace_out));
  }
  return 0;
}

int cmd_energy(const std::string& model_dir, const std::string& dataset,
               const energy::HardwareProfile& hw, bool exclude_input, const std::string& out,
               const GlobalOptions& g, RunRecord& rec) {
  const auto model = model_io::load_model(model_dir);
  const auto pipeline = dataset_pipeline(dataset, "");
  const auto ds = data::ingest_external(
      dataset, pipeline, pipeline == data::PipelineKind::rangedoppler ? model.t_inf : 0);
  std::vector<encoding::SpikeTensor> xs;
  xs.reserve(ds.examples.size());
  for (const auto& e : ds.examples) xs.push_back(data::to_spike_tensor(e, model.t_inf));
  const auto rep = energy::report_for_dataset(model, xs, hw, !exclude_input, g.jobs);
  json j = {{"schema_version", 1},
            {"kind", "energy_report"},
            {"examples", rep.examples},
            {"include_input_spikes", rep.include_input_spikes},
            {"n_spikes_max", rep.n_spikes_max},
            {"n_spikes_mean", rep.n_spikes_mean},
            {"e_c_max_joules", rep.e_c_max},
            {"e_c_mean_joules", rep.e_c_mean},
            {"static_floor_joules", rep.static_floor},
            {"hardware", {{"e_dyn", hw.e_dyn}, {"p_stat", hw.p_stat}, {"delta_t", hw.delta_t}}},
            {"dataset_provenance", ds.manifest.provenance}};
  write_json(out, j);
  rec.config() = {{"edyn", hw.e_dyn}, {"pstat", hw.p_stat}, {"deltat", hw.delta_t},
                  {"include_input_spikes", !exclude_input}};
  rec.add_input(model_dir);
  rec.add_input(dataset);
  rec.add_output(out);
  rec.write(record_path_for_file(out));
  std::printf("E_c max %.4g J, mean %.4g J (static floor %.4g J) over %zu examples\n", rep.e_c_max,
              rep.e_c_mean, rep.static_floor, rep.examples);
  return 0;
}

int cmd_plot_map(const std::string& input, const std::string& out, RunRecord& rec) {
  auto payload = data::tensor_to_payload(io::read_file(input), data::PipelineKind::udoppler, input);
  const auto* map = std::get_if<dsp::MicroDopplerMap>(&payload);
  if (!map) throw InvalidInput(input + " is not a micro-Doppler map");
  plot::write_pgm(out, plot::map_image(*map));
  rec.add_input(input);
  rec.add_output(out);
  rec.write(record_path_for_file(out));
  return 0;
}

int cmd_plot_tensor(const std::string& input, const std::string& out, RunRecord& rec) {
  io::StoredTensor t = io::read_file(input);
  if (t.dtype != io::DType::u1) throw InvalidInput(input + " is not a spike tensor");
  const auto tensor = std::get<encoding::SpikeTensor>(
      data::tensor_to_payload(std::move(t), data::PipelineKind::udoppler, input));
  fs::create_directories(out);
  const auto files = plot::write_tensor_pgms(out, tensor);
  rec.add_input(input);
  for (const auto& f : files) rec.add_output(f);
  rec.write(fs::path(out) / "run_record.json");
  std::printf("%zu images written to %s\n", files.size(), out.c_str());
  return 0;
}

int cmd_plot_loss(const std::string& input, const std::string& out, RunRecord& rec) {
  json report;
  try {
    report = json::parse(io::read_bytes(input));
  } catch (const json::exception& e) {
    throw InvalidInput(input + ": " + e.what());
  }
  if (!report.contains("folds")) throw InvalidInput(input + " is not a fold report");
  std::vector<std::vector<double>> losses;
  for (const auto& f : report["folds"]) losses.push_back(f.at("epoch_loss").get<std::vector<double>>());
  plot::write_loss_csv(out, losses);
  rec.add_input(input);
  rec.add_output(out);
  rec.write(record_path_for_file(out));
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spiking-network radar gesture recognition toolkit", "spikeradar"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every stochastic step");
  app.add_option("--jobs", g.jobs, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--verbose", g.verbose, "Progress output on stderr");

  std::function<int(RunRecord&)> action;
  std::string command;

  // dsp
  auto* dsp = app.add_subcommand("dsp", "Radar preprocessing");
  dsp->require_subcommand(1);
  UdopplerArgs ud;
  auto* dsp_ud = dsp->add_subcommand("udoppler", "Radar cube -> normalized micro-Doppler maps");
  dsp_ud->add_option("--input", ud.input, "Radar cube container (chirp, fast_time)")->required();
  dsp_ud->add_option("--out", ud.out, "Output directory")->required();
  dsp_ud->add_option("--range-bin", ud.range_bin, "Gesture range bin (estimated when omitted)");
  dsp_ud->add_option("--window", ud.window, "STFT window length");
  dsp_ud->add_option("--hop", ud.hop, "STFT hop in chirps");
  dsp_ud->add_option("--band", ud.band, "Doppler band limits (normalized frequency)")->expected(2);
  dsp_ud->add_option("--topk", ud.topk, "Values kept per spectrum");
  dsp_ud->add_option("--segment", ud.segment, "Map length in STFT frames");
  dsp_ud->add_option("--trim", ud.trim, "Maps dropped at each end");
  dsp_ud->add_option("--chirps-per-frame", ud.chirps_per_frame, "Chirps per frame");
  dsp_ud->add_option("--fft-len", ud.fft_len, "Range FFT length (0: next power of two)");
  dsp_ud->add_flag("--export-pgm", ud.export_pgm, "Also write each map as a PGM image");
  dsp_ud->callback([&] {
    command = "dsp udoppler";
    action = [&](RunRecord& r) { return cmd_dsp_udoppler(ud, r); };
  });

  std::string rd_input, rd_out;
  std::size_t rd_tinf = 28;
  auto* dsp_rd = dsp->add_subcommand("rangedoppler", "Range-Doppler sequence -> binary spike tensor");
  dsp_rd->add_option("--input", rd_input, "Range-Doppler sequence container")->required();
  dsp_rd->add_option("--tinf", rd_tinf, "Inference steps")->check(CLI::PositiveNumber);
  dsp_rd->add_option("--out", rd_out, "Output tensor file")->required();
  dsp_rd->callback([&] {
    command = "dsp rangedoppler";
    action = [&](RunRecord& r) { return cmd_dsp_rangedoppler(rd_input, rd_tinf, rd_out, r); };
  });

  // encode
  auto* enc = app.add_subcommand("encode", "Spike encoding");
  enc->require_subcommand(1);
  std::string enc_input, enc_out;
  std::size_t enc_tinf = 4;
  auto* ttfs = enc->add_subcommand("ttfs", "Time-to-first-spike encoding of maps");
  ttfs->add_option("--input", enc_input, "Map file or dataset directory")->required();
  ttfs->add_option("--out", enc_out, "Tensor file or dataset directory")->required();
  ttfs->add_option("--tinf", enc_tinf, "Inference steps")->check(CLI::PositiveNumber);
  ttfs->callback([&] {
    command = "encode ttfs";
    action = [&](RunRecord& r) { return cmd_encode_ttfs(enc_input, enc_tinf, enc_out, r); };
  });

  // synth
  data::SynthConfig sc;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic micro-Doppler dataset");
  synth->add_option("--classes", sc.n_classes, "Number of classes");
  synth->add_option("--per-class", sc.n_per_class, "Examples per class");
  synth->add_option("--noise", sc.noise, "Uniform noise bound relative to the track peak");
  synth->add_option("--variability", sc.variability, "Scale of per-example template jitter");
  synth->add_option("--track-width", sc.track_width, "Track half-width in Doppler columns");
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->callback([&] {
    command = "synth";
    action = [&](RunRecord& r) {
      sc.seed = g.seed.value_or(7);
      return cmd_synth(sc, synth_out, r);
    };
  });

  // dataset info
  auto* dataset = app.add_subcommand("dataset", "Dataset utilities");
  dataset->require_subcommand(1);
  std::string info_dir;
  auto* info = dataset->add_subcommand("info", "Print a dataset manifest summary");
  info->add_option("dir", info_dir, "Dataset directory")->required();
  info->callback([&] {
    command = "dataset info";
    action = [&](RunRecord&) { return cmd_dataset_info(info_dir); };
  });

  // train
  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Cross-validated training with quantization-aware fine-tuning");
  tr->add_option("--dataset", ta.dataset, "Dataset directory")->required();
  tr->add_option("--pipeline", ta.pipeline, "udoppler or rangedoppler (default: from manifest)")
      ->check(CLI::IsMember({"udoppler", "rangedoppler"}));
  tr->add_option("--tinf", ta.tinf, "Inference steps")->check(CLI::PositiveNumber);
  tr->add_option("--bits", ta.bits, "Weight bits")->check(CLI::Range(2, 8));
  tr->add_option("--folds", ta.folds, "Cross-validation folds");
  tr->add_option("--fold-limit", ta.fold_limit, "Train only the first n folds (0: all)");
  tr->add_option("--epochs", ta.epochs, "Full-precision epochs");
  tr->add_option("--qat-epochs", ta.qat_epochs, "Quantized-forward epochs");
  tr->add_option("--batch", ta.batch, "Batch size")->check(CLI::PositiveNumber);
  tr->add_option("--lr", ta.lr, "Adam learning rate");
  tr->add_option("--hidden", ta.hidden, "Hidden dense width")->check(CLI::PositiveNumber);
  tr->add_option("--init-gain", ta.init_gain, "Multiplier on the Glorot initialization bound");
  tr->add_option("--neuron", ta.neuron, "compare_then_integrate or integrate_then_fire")
      ->check(CLI::IsMember({"compare_then_integrate", "integrate_then_fire"}));
  tr->add_flag("--balance", ta.balance, "Subsample every class to the smallest class");
  tr->add_option("--out", ta.out, "Output model directory")->required();
  tr->callback([&] {
    command = "train";
    action = [&](RunRecord& r) { return cmd_train(ta, g, r); };
  });

  // infer
  std::string inf_model, inf_input, inf_trace;
  bool inf_quantized = false;
  auto* inf = app.add_subcommand("infer", "Classify one map or spike tensor");
  inf->add_option("--model", inf_model, "Model directory")->required();
  inf->add_option("--input", inf_input, "Map (f32) or spike tensor (u1) file")->required();
  inf->add_flag("--quantized", inf_quantized, "Use the quantized weights");
  inf->add_option("--trace", inf_trace, "Write a spike trace JSON here");
  inf->callback([&] {
    command = "infer";
    action = [&](RunRecord& r) {
      return cmd_infer(inf_model, inf_input, inf_quantized, inf_trace, r);
    };
  });

  // energy
  std::string en_model, en_dataset, en_out;
  energy::HardwareProfile hw;
  bool en_exclude_input = false;
  auto* en = app.add_subcommand("energy", "Energy per classification over a dataset");
  en->add_option("--model", en_model, "Model directory")->required();
  en->add_option("--dataset", en_dataset, "Dataset directory")->required();
  en->add_option("--edyn", hw.e_dyn, "Energy per spike (J)");
  en->add_option("--pstat", hw.p_stat, "Static power (W)");
  en->add_option("--deltat", hw.delta_t, "Inference duration (s)");
  en->add_flag("--exclude-input-spikes", en_exclude_input, "Count only network spikes");
  en->add_option("--out", en_out, "Report JSON")->required();
  en->callback([&] {
    command = "energy";
    action = [&](RunRecord& r) {
      return cmd_energy(en_model, en_dataset, hw, en_exclude_input, en_out, g, r);
    };
  });

  // plot
  auto* pl = app.add_subcommand("plot", "Export images and CSV");
  pl->require_subcommand(1);
  std::string pl_input, pl_out;
  auto* pl_map = pl->add_subcommand("map", "Map file -> 8-bit PGM");
  auto* pl_tensor = pl->add_subcommand("tensor", "Spike tensor -> one PGM per step");
  auto* pl_loss = pl->add_subcommand("loss", "Fold report -> loss-curve CSV");
  for (auto* sub : {pl_map, pl_tensor, pl_loss}) {
    sub->add_option("--input", pl_input, "Input file")->required();
    sub->add_option("--out", pl_out, "Output path")->required();
  }
  pl_map->callback([&] {
    command = "plot map";
    action = [&](RunRecord& r) { return cmd_plot_map(pl_input, pl_out, r); };
  });
  pl_tensor->callback([&] {
    command = "plot tensor";
    action = [&](RunRecord& r) { return cmd_plot_tensor(pl_input, pl_out, r); };
  });
  pl_loss->callback([&] {
    command = "plot loss";
    action = [&](RunRecord& r) { return cmd_plot_loss(pl_input, pl_out, r); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*seed_opt) g.seed = seed_value;
  std::vector<std::string> args(argv, argv + argc);
  try {
    if (!action) throw Error("no command selected");
    RunRecord rec(command, g, args);
    if (g.seed) rec.set_seed(*g.seed);
    return action(rec);
  } catch (const CorruptDataset& e) {
    std::fprintf(stderr, "error: corrupt dataset: %s\n", e.what());
    return 3;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace spikeradar::cli
