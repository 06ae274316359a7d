#include <doctest.h>

#include <cmath>
#include <random>

#include "spikeradar/encoding.hpp"
#include "spikeradar/error.hpp"

using namespace spikeradar;
using namespace spikeradar::encoding;

TEST_SUITE("spike-encoding") {
  TEST_CASE("single-pixel step values") {
    CHECK(ttfs_step(0.0, 4) == 0);
    CHECK(ttfs_step(1.0, 4) == 1);
    CHECK(ttfs_step(0.5, 4) == 2);
    CHECK(ttfs_step(0.1, 4) == 4);
    CHECK(ttfs_step(0.75, 4) == 1);
    CHECK(ttfs_step(0.7499, 4) == 2);
    CHECK_THROWS_AS(ttfs_step(1.5, 4), InvalidInput);
    CHECK_THROWS_AS(ttfs_step(-0.1, 4), InvalidInput);
    CHECK_THROWS_AS(ttfs_step(std::nan(""), 4), InvalidInput);
  }

  TEST_CASE("encoded maps keep orientation and emit one spike per nonzero pixel") {
    dsp::MicroDopplerMap m{2, 3, {0.0, 1.0, 0.5, 0.1, 0.0, 0.3}, true};
    const auto t = ttfs_encode(m, 4);
    CHECK(t.t_inf == 4);
    CHECK(t.channels == 1);
    CHECK(t.height == 2);
    CHECK(t.width == 3);
    CHECK(t.spike_count() == 4);
    CHECK(t.at(0, 0, 0, 1) == 1);
    CHECK(t.at(1, 0, 0, 2) == 1);
    CHECK(t.at(3, 0, 1, 0) == 1);
    CHECK(t.at(2, 0, 1, 2) == 1);
  }

  TEST_CASE("monotonic, sparse and interval-consistent over a dense grid") {
    for (std::size_t t_inf : {2u, 4u, 8u, 28u}) {
      std::size_t prev = t_inf;
      for (int i = 1; i <= 10000; ++i) {
        const double v = static_cast<double>(i) / 10000.0;
        const std::size_t s = ttfs_step(v, t_inf);
        REQUIRE(s >= 1);
        REQUIRE(s <= t_inf);
        CHECK(s <= prev);
        prev = s;
        const auto level = static_cast<std::size_t>(std::floor(v * t_inf));
        CHECK(s == std::max<std::size_t>(1, t_inf - level));
      }
    }
  }

  TEST_CASE("wrap and unwrap") {
    dsp::BinaryRdSequence zeros{4, 3, 3, std::vector<std::uint8_t>(36, 0)};
    CHECK(wrap_binary(zeros).spike_count() == 0);

    dsp::BinaryRdSequence one{5, 3, 4, std::vector<std::uint8_t>(60, 0)};
    one.frames[(3 * 3 + 1) * 4 + 2] = 1;
    const auto t = wrap_binary(one);
    CHECK(t.at(3, 0, 1, 2) == 1);
    CHECK(t.spike_count() == 1);

    std::mt19937_64 gen(6);
    dsp::BinaryRdSequence r{28, 8, 8, std::vector<std::uint8_t>(28 * 64)};
    for (auto& b : r.frames) b = gen() & 1;
    CHECK(unwrap_binary(wrap_binary(r)).frames == r.frames);
  }
}
