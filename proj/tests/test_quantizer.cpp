#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "spikeradar/error.hpp"
#include "spikeradar/quantizer.hpp"

using namespace spikeradar;
using namespace spikeradar::quant;

namespace {

std::vector<double> random_weights(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> w(n);
  for (double& x : w) x = g(gen);
  return w;
}

}  // namespace

TEST_SUITE("quantizer") {
  TEST_CASE("zero tensor") {
    const auto q = quantize(std::vector<double>{0.0, 0.0}, 4);
    CHECK(q.codes == std::vector<std::int8_t>{0, 0});
    CHECK(q.scale == 1.0);
    for (double v : dequantize(q)) CHECK(v == 0.0);
  }

  TEST_CASE("extremes map to the outermost codes") {
    const auto q = quantize(std::vector<double>{-1.0, 1.0}, 4);
    CHECK(q.scale == doctest::Approx(1.0 / 7.0));
    CHECK(q.codes == std::vector<std::int8_t>{-7, 7});
    QuantizedTensor seven{{7}, 1.0 / 7.0, 4};
    CHECK(dequantize(seven)[0] == doctest::Approx(1.0));
    CHECK(max_code(4) == 7);
    CHECK(max_code(6) == 31);
    CHECK(max_code(8) == 127);
  }

  TEST_CASE("rounding is half away from zero") {
    // scale is 1 when max|w| equals max_code.
    const auto q = quantize(std::vector<double>{7.0, 2.5, -2.5, 0.5, -0.5, 1.49}, 4);
    CHECK(q.scale == 1.0);
    CHECK(q.codes == std::vector<std::int8_t>{7, 3, -3, 1, -1, 1});
  }

  TEST_CASE("error bound, range, idempotence and monotonicity on random tensors") {
    std::mt19937_64 gen(8);
    for (int bits : {2, 3, 4, 5, 6, 7, 8}) {
      for (int trial = 0; trial < 20; ++trial) {
        const auto w = random_weights(gen, 1 + gen() % 300);
        const auto q = quantize(w, bits);
        REQUIRE(q.codes.size() == w.size());
        CHECK(q.scale > 0.0);
        CHECK(q.bits == bits);
        const auto d = dequantize(q);
        for (std::size_t i = 0; i < w.size(); ++i) {
          CHECK(std::abs(d[i] - w[i]) <= q.scale / 2 * (1 + 1e-12));
          CHECK(std::abs(static_cast<int>(q.codes[i])) <= max_code(bits));
        }
        CHECK(quantize(d, bits).codes == q.codes);
        std::vector<std::size_t> order(w.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return w[a] < w[b]; });
        for (std::size_t i = 1; i < order.size(); ++i) CHECK(q.codes[order[i - 1]] <= q.codes[order[i]]);
      }
    }
  }

  TEST_CASE("level count is 2^b - 1") {
    for (int bits : {2, 4, 6}) {
      std::vector<double> w;
      for (int i = -400; i <= 400; ++i) w.push_back(i / 400.0);
      const auto q = quantize(w, bits);
      const std::set<int> levels(q.codes.begin(), q.codes.end());
      CHECK(levels.size() == static_cast<std::size_t>((1 << bits) - 1));
    }
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(quantize(std::vector<double>{1.0, std::nan("")}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize(std::vector<double>{INFINITY}, 4), InvalidInput);
    CHECK_THROWS_AS(quantize(std::vector<double>{1.0}, 1), InvalidInput);
    CHECK_THROWS_AS(quantize(std::vector<double>{1.0}, 9), InvalidInput);
  }
}
