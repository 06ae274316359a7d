#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spikeradar/energy.hpp"
#include "spikeradar/error.hpp"

using namespace spikeradar;
using namespace spikeradar::energy;

namespace {

snn::SnnModel small_model(std::mt19937_64& gen) {
  snn::ArchitectureConfig a;
  a.input = {1, 8, 8};
  a.kernel = 3;
  a.conv_channels = 3;
  a.hidden = 6;
  a.classes = 3;
  auto m = snn::make_model(a, 4);
  std::uniform_real_distribution<double> u(-0.5, 1.3);
  for (auto& w : m.weights)
    for (double& x : w) x = u(gen);
  snn::quantize_model(m, 4);
  return m;
}

}  // namespace

TEST_SUITE("energy-model") {
  TEST_CASE("static floors and the 28095-spike point") {
    HardwareProfile hw;
    CHECK(energy_per_classification(0, hw) == doctest::Approx(292.0e-9).epsilon(1e-4));
    CHECK(std::abs(energy_per_classification(28095, hw) - 351e-9) <= 0.5e-9);
    hw.delta_t = 28e-3;
    CHECK(energy_per_classification(0, hw) == doctest::Approx(2.044e-6).epsilon(1e-4));
    CHECK(std::abs(energy_per_classification(0, hw) - 2e-6) / 2e-6 <= 0.05);
  }

  TEST_CASE("energy is affine in the spike count with slope e_dyn") {
    HardwareProfile hw;
    double prev = energy_per_classification(0, hw);
    for (int n = 1000; n <= 100000; n += 1000) {
      const double e = energy_per_classification(n, hw);
      CHECK(e > prev);
      CHECK((e - prev) == doctest::Approx(1000 * hw.e_dyn).epsilon(1e-9));
      prev = e;
    }
    CHECK_THROWS_AS(energy_per_classification(-1, hw), InvalidInput);
  }

  TEST_CASE("hardware profile must be strictly positive") {
    HardwareProfile hw;
    hw.p_stat = 0.0;
    CHECK_THROWS_AS(hw.validate(), InvalidInput);
    hw = {};
    hw.e_dyn = -1.0;
    CHECK_THROWS_AS(hw.validate(), InvalidInput);
  }

  TEST_CASE("report on silent input equals the static floor") {
    std::mt19937_64 gen(1);
    const auto m = small_model(gen);
    std::vector<encoding::SpikeTensor> xs(3, encoding::SpikeTensor(4, 1, 8, 8));
    const auto r = report_for_dataset(m, xs, {});
    CHECK(r.n_spikes_max == 0);
    CHECK(r.e_c_max == r.static_floor);
    CHECK(r.e_c_mean == r.static_floor);
    CHECK(r.examples == 3);
  }

  TEST_CASE("spike counts match the scalar oracle") {
    std::mt19937_64 gen(2);
    const auto m = small_model(gen);
    std::vector<encoding::SpikeTensor> xs;
    std::vector<std::size_t> totals, hidden;
    for (int i = 0; i < 2; ++i) {
      const auto steps = oracle::random_steps(gen, 4, 64, 0.4);
      encoding::SpikeTensor t(4, 1, 8, 8);
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 64; ++j) t.bits[k * 64 + j] = steps[k][j] != 0.0;
      const auto tr = oracle::scalar_forward(m, steps, true);
      std::size_t layer = 0;
      for (auto c : tr.layer_spikes) layer += c;
      totals.push_back(tr.input_spikes + layer);
      hidden.push_back(layer);
      xs.push_back(std::move(t));
    }
    HardwareProfile hw;
    const auto r = report_for_dataset(m, xs, hw);
    CHECK(r.n_spikes_max == std::max(totals[0], totals[1]));
    CHECK(r.n_spikes_mean == doctest::Approx((totals[0] + totals[1]) / 2.0));
    CHECK(r.e_c_max == doctest::Approx(energy_per_classification(r.n_spikes_max, hw)));
    CHECK(r.e_c_max >= r.e_c_mean);
    CHECK(r.e_c_max >= r.static_floor);

    const auto no_input = report_for_dataset(m, xs, hw, false, 2);
    CHECK(no_input.n_spikes_max == std::max(hidden[0], hidden[1]));
    CHECK_FALSE(no_input.include_input_spikes);

    const std::span<const encoding::SpikeTensor> one(xs.data(), 1);
    const auto single = report_for_dataset(m, one, hw);
    CHECK(static_cast<double>(single.n_spikes_max) == single.n_spikes_mean);
    CHECK(single.e_c_max == single.e_c_mean);
  }

  TEST_CASE("invalid report requests") {
    std::mt19937_64 gen(3);
    auto m = small_model(gen);
    CHECK_THROWS_AS(report_for_dataset(m, std::vector<encoding::SpikeTensor>{}, {}), InvalidInput);
    m.quantized.reset();
    std::vector<encoding::SpikeTensor> xs(1, encoding::SpikeTensor(4, 1, 8, 8));
    CHECK_THROWS_AS(report_for_dataset(m, xs, {}), MissingQuantizedWeights);
  }
}
