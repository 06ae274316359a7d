#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <map>

#include "oracles.hpp"
#include "spikeradar/dataset.hpp"
#include "spikeradar/error.hpp"
#include "spikeradar/random.hpp"

using namespace spikeradar;
using namespace spikeradar::data;

namespace {

LabeledExample labeled(std::size_t label, std::size_t i) {
  dsp::MicroDopplerMap m;
  m.time_len = 1;
  m.doppler_bins = 1;
  m.values = {0.0};
  LabeledExample e{m, label, "acq-" + std::to_string(label) + "-" + std::to_string(i), i};
  return e;
}

std::vector<LabeledExample> with_counts(const std::vector<std::size_t>& counts) {
  std::vector<LabeledExample> out;
  for (std::size_t c = 0; c < counts.size(); ++c)
    for (std::size_t i = 0; i < counts[c]; ++i) out.push_back(labeled(c, i));
  return out;
}

Dataset rangedoppler_dataset(std::size_t t_fr) {
  Dataset ds;
  ds.manifest.pipeline = PipelineKind::rangedoppler;
  ds.manifest.class_names = {"push", "pull"};
  for (std::size_t c = 0; c < 2; ++c) {
    dsp::RangeDopplerSequence s;
    s.t_fr = c == 0 ? 30 : t_fr;
    s.range_bins = 4;
    s.doppler_bins = 3;
    s.frames.assign(s.t_fr * 12, 0.0);
    for (std::size_t i = 0; i < s.frames.size(); i += 5) s.frames[i] = 0.5;
    ds.examples.push_back({s, c, c == 0 ? "session-a" : "session-b", 0});
  }
  return ds;
}

bool same_bytes(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("data-io") {
  TEST_CASE("empty or missing directories are corrupt datasets") {
    const auto dir = oracle::scratch_dir("empty");
    CHECK_THROWS_AS(ingest_external(dir, PipelineKind::udoppler), CorruptDataset);
    CHECK_THROWS_AS(ingest_external(dir / "nope", PipelineKind::udoppler), CorruptDataset);
  }

  TEST_CASE("three-file export round-trips bit-identically") {
    SynthConfig cfg;
    cfg.n_per_class = 1;
    cfg.n_classes = 3;
    auto ds = synth_udoppler(cfg).dataset;
    REQUIRE(ds.examples.size() == 3);
    const auto dir = oracle::scratch_dir("roundtrip");
    export_dataset(dir, ds);
    const auto back = ingest_external(dir, PipelineKind::udoppler);
    REQUIRE(back.examples.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& a = std::get<dsp::MicroDopplerMap>(ds.examples[i].payload);
      const auto& b = std::get<dsp::MicroDopplerMap>(back.examples[i].payload);
      CHECK(same_bytes(a.values, b.values));
      CHECK(back.examples[i].label == ds.examples[i].label);
      CHECK(back.examples[i].acquisition_id == ds.examples[i].acquisition_id);
    }
    CHECK(back.manifest.class_names == ds.manifest.class_names);
    CHECK(back.manifest.provenance == "synthetic");
    CHECK(back.manifest.seed == cfg.seed);
    CHECK_THROWS_AS(ingest_external(dir, PipelineKind::rangedoppler), InvalidInput);

    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.path().filename() != "manifest.json") {
        std::filesystem::remove(e.path());
        break;
      }
    }
    CHECK_THROWS_AS(ingest_external(dir, PipelineKind::udoppler), CorruptDataset);
  }

  TEST_CASE("spike tensors and range-Doppler sequences round-trip") {
    auto ds = rangedoppler_dataset(28);
    const auto dir = oracle::scratch_dir("rd");
    export_dataset(dir, ds);
    const auto back = ingest_external(dir, PipelineKind::rangedoppler, 28);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& a = std::get<dsp::RangeDopplerSequence>(ds.examples[i].payload);
      const auto& b = std::get<dsp::RangeDopplerSequence>(back.examples[i].payload);
      CHECK(same_bytes(a.frames, b.frames));
      CHECK(a.t_fr == b.t_fr);
    }

    Dataset spikes;
    spikes.manifest.class_names = {"a", "b"};
    for (std::size_t c = 0; c < 2; ++c) {
      encoding::SpikeTensor t(3, 1, 5, 7);
      for (std::size_t i = c; i < t.bits.size(); i += 3) t.bits[i] = 1;
      spikes.examples.push_back({t, c, "s" + std::to_string(c), 0});
    }
    const auto sdir = oracle::scratch_dir("spikes");
    export_dataset(sdir, spikes);
    const auto sback = ingest_external(sdir, PipelineKind::udoppler);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(std::get<encoding::SpikeTensor>(sback.examples[i].payload).bits ==
            std::get<encoding::SpikeTensor>(spikes.examples[i].payload).bits);
  }

  TEST_CASE("a sequence shorter than T_inf names its acquisition") {
    const auto dir = oracle::scratch_dir("short");
    export_dataset(dir, rangedoppler_dataset(27));
    try {
      ingest_external(dir, PipelineKind::rangedoppler, 28);
      FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("session-b") != std::string::npos);
    }
    CHECK_NOTHROW(ingest_external(dir, PipelineKind::rangedoppler, 27));
  }

  TEST_CASE("balancing") {
    const auto even = with_counts({10, 10});
    const auto same = balance_dataset(even, 2, 1);
    REQUIRE(same.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(same[i].acquisition_id == even[i].acquisition_id);

    const auto uneven = with_counts({12, 10});
    const auto a = balance_dataset(uneven, 2, 5);
    CHECK(class_counts(a, 2) == std::vector<std::size_t>{10, 10});
    const auto b = balance_dataset(uneven, 2, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].acquisition_id == b[i].acquisition_id);

    // Oracle: the same seeded shuffle of class 0's indices, truncated.
    std::vector<std::size_t> idx(12);
    for (std::size_t i = 0; i < 12; ++i) idx[i] = i;
    Rng rng(derive_seed(5, 0));
    rng.shuffle(idx);
    idx.resize(10);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> want;
    for (auto i : idx) want.push_back(uneven[i].acquisition_id);
    std::vector<std::string> got;
    for (const auto& e : a)
      if (e.label == 0) got.push_back(e.acquisition_id);
    CHECK(got == want);

    for (int trial = 0; trial < 20; ++trial) {
      std::vector<std::size_t> counts{1 + trial % 7u, 3 + trial % 5u, 2 + trial % 3u};
      const auto r = balance_dataset(with_counts(counts), 3, trial);
      const auto rc = class_counts(r, 3);
      const auto mn = *std::min_element(counts.begin(), counts.end());
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(rc[c] == mn);
        CHECK(rc[c] <= counts[c]);
      }
      for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i].label == r[i - 1].label) CHECK(r[i].segment_index > r[i - 1].segment_index);
    }
    CHECK_THROWS_AS(balance_dataset(with_counts({3, 0}), 2, 1), InvalidInput);
  }

  TEST_CASE("stratified folds") {
    auto labels_for = [](const std::vector<std::size_t>& counts) {
      std::vector<std::size_t> l;
      for (std::size_t c = 0; c < counts.size(); ++c) l.insert(l.end(), counts[c], c);
      return l;
    };
    const auto l60 = labels_for({12, 12, 12, 12, 12});
    const auto f60 = stratified_folds(l60, 5, 6, 9);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> per;
    for (std::size_t i = 0; i < l60.size(); ++i) ++per[{f60[i], l60[i]}];
    for (std::size_t f = 0; f < 6; ++f)
      for (std::size_t c = 0; c < 5; ++c) CHECK(per[{f, c}] == 2);

    const auto l61 = labels_for({13, 12, 12, 12, 12});
    const auto f61 = stratified_folds(l61, 5, 6, 9);
    std::vector<std::size_t> sizes(6, 0);
    for (auto f : f61) ++sizes[f];
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<std::size_t>{10, 10, 10, 10, 10, 11});

    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t folds = 2 + gen() % 6;
      std::vector<std::size_t> counts;
      for (int c = 0; c < 4; ++c) counts.push_back(folds + gen() % 20);
      const auto l = labels_for(counts);
      const auto f = stratified_folds(l, 4, folds, trial);
      REQUIRE(f.size() == l.size());
      std::vector<std::size_t> total(folds, 0);
      for (std::size_t c = 0; c < 4; ++c) {
        std::vector<std::size_t> cc(folds, 0);
        for (std::size_t i = 0; i < l.size(); ++i)
          if (l[i] == c) ++cc[f[i]];
        CHECK(*std::max_element(cc.begin(), cc.end()) - *std::min_element(cc.begin(), cc.end()) <= 1);
      }
      for (auto x : f) {
        REQUIRE(x < folds);
        ++total[x];
      }
      CHECK(*std::max_element(total.begin(), total.end()) - *std::min_element(total.begin(), total.end()) <= 1);
    }
    CHECK(stratified_folds(l60, 5, 6, 9) == f60);
    CHECK_THROWS_AS(stratified_folds(labels_for({12, 5}), 2, 6, 1), StratificationError);
    CHECK_THROWS_AS(stratified_folds(l60, 5, 1, 1), InvalidInput);
  }

  TEST_CASE("synthetic generator") {
    SynthConfig clean;
    clean.noise = 0.0;
    clean.variability = 0.0;
    clean.n_per_class = 2;
    const auto t = synth_udoppler(clean).dataset;
    std::vector<const std::vector<double>*> per_class(clean.n_classes);
    for (const auto& e : t.examples) {
      const auto& m = std::get<dsp::MicroDopplerMap>(e.payload);
      CHECK(m.time_len == 48);
      CHECK(m.doppler_bins == 99);
      for (double v : m.values) CHECK((v >= 0.0 && v <= 1.0));
      if (per_class[e.label]) {
        CHECK(*per_class[e.label] == m.values);
      } else {
        per_class[e.label] = &m.values;
      }
    }
    for (std::size_t a = 0; a < clean.n_classes; ++a)
      for (std::size_t b = a + 1; b < clean.n_classes; ++b) {
        double d = 0.0;
        for (std::size_t i = 0; i < per_class[a]->size(); ++i)
          d += ((*per_class[a])[i] - (*per_class[b])[i]) * ((*per_class[a])[i] - (*per_class[b])[i]);
        CHECK(d > 0.0);
      }

    SynthConfig cfg;
    cfg.n_per_class = 30;
    const auto r1 = synth_udoppler(cfg);
    const auto r2 = synth_udoppler(cfg);
    for (std::size_t i = 0; i < r1.dataset.examples.size(); ++i)
      CHECK(same_bytes(std::get<dsp::MicroDopplerMap>(r1.dataset.examples[i].payload).values,
                       std::get<dsp::MicroDopplerMap>(r2.dataset.examples[i].payload).values));
    CHECK(r1.nearest_centroid_accuracy >= 0.8);
    CHECK(r1.nearest_centroid_accuracy == nearest_centroid_accuracy(r1.dataset.examples, 5));

    cfg.seed = 8;
    const auto r3 = synth_udoppler(cfg);
    CHECK_FALSE(std::get<dsp::MicroDopplerMap>(r3.dataset.examples[0].payload).values ==
                std::get<dsp::MicroDopplerMap>(r1.dataset.examples[0].payload).values);
    SynthConfig bad;
    bad.n_classes = 1;
    CHECK_THROWS_AS(synth_udoppler(bad), InvalidInput);
  }

  TEST_CASE("encoding for the network") {
    SynthConfig cfg;
    cfg.n_per_class = 1;
    const auto ds = synth_udoppler(cfg).dataset;
    const auto t = to_spike_tensor(ds.examples[0], 4);
    CHECK(t.t_inf == 4);
    CHECK(t.height == 48);
    CHECK(t.width == 99);
    const auto rd = rangedoppler_dataset(28);
    const auto s = to_spike_tensor(rd.examples[1], 28);
    CHECK(s.t_inf == 28);
    CHECK(s.channels == 1);
    CHECK_THROWS_AS(to_spike_tensor(rd.examples[1], 29), InvalidInput);
  }
}
