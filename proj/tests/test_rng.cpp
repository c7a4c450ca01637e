#include <doctest.h>

#include <random>
#include <set>

#include "spikechain/numeric.hpp"
#include "spikechain/rng.hpp"

using namespace spikechain;

TEST_CASE("philox known answer") {
  // Random123 kat_vectors: philox4x32_10, zero counter and key.
  const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(r[0] == 0x6627e8d5u);
  CHECK(r[1] == 0xe169c58du);
  CHECK(r[2] == 0xbc57ac4cu);
  CHECK(r[3] == 0x9b00dbd8u);
  const auto s = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(s[0] == 0x408f276du);
  CHECK(s[1] == 0x41c83b0eu);
  CHECK(s[2] == 0xa20bc7c6u);
  CHECK(s[3] == 0x6d5451fdu);
}

TEST_CASE("coordinate draws are deterministic and distinct") {
  const CoordinateRng a(42), b(42), c(43);
  CHECK(a.bits(StreamTag::xi, 3, -17) == b.bits(StreamTag::xi, 3, -17));
  CHECK(a.bits(StreamTag::xi, 3, -17) != c.bits(StreamTag::xi, 3, -17));
  CHECK(a.bits(StreamTag::xi, 3, -17) != a.bits(StreamTag::range, 3, -17));
  CHECK(a.bits(StreamTag::xi, 3, -17) != a.bits(StreamTag::xi, 4, -17));
  CHECK(a.bits(StreamTag::xi, 3, -17) != a.bits(StreamTag::xi, 3, -17, 1));
  // High time bits reach the counter.
  CHECK(a.bits(StreamTag::xi, 0, 1) != a.bits(StreamTag::xi, 0, (Time{1} << 32) + 1));
}

TEST_CASE("uniforms have the right moments") {
  const CoordinateRng src(7);
  const int n = 200000;
  NeumaierSum s, s2;
  for (int t = 0; t < n; ++t) {
    const double u = src.uniform(StreamTag::value, t % 5, t);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s.add(u);
    s2.add(u * u);
  }
  const double mean = s.value() / n;
  CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(s2.value() / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("derived sources are independent of each other and of the parent") {
  const CoordinateRng src(11);
  std::set<std::uint64_t> seeds{src.seed()};
  for (std::uint64_t r = 0; r < 1000; ++r) seeds.insert(src.derive(StreamTag::replica, r).seed());
  seeds.insert(src.derive(StreamTag::graph, 0).seed());
  CHECK(seeds.size() == 1002);
  CHECK(src.derive(StreamTag::replica, 5).seed() == CoordinateRng(11).derive(StreamTag::replica, 5).seed());
}

TEST_CASE("draw counter is shared with derived sources") {
  const CoordinateRng src(3);
  const auto before = src.draws();
  src.uniform(StreamTag::xi, 0, 0);
  src.derive(StreamTag::replica, 1).uniform(StreamTag::xi, 0, 0);
  CHECK(src.draws() >= before + 2);
}

TEST_CASE("philox engine works with std distributions") {
  PhiloxEngine a(5, 1), b(5, 1), c(5, 2);
  std::uniform_int_distribution<int> d(0, 9);
  std::vector<int> xa, xb, xc;
  for (int k = 0; k < 100; ++k) {
    xa.push_back(d(a));
    xb.push_back(d(b));
    xc.push_back(d(c));
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  NeumaierSum s;
  PhiloxEngine e(9, 0);
  for (int k = 0; k < 100000; ++k) s.add(e.uniform());
  CHECK(std::abs(s.value() / 100000 - 0.5) < 0.005);
}
