#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "patternmark/config.hpp"
#include "patternmark/errors.hpp"
#include "patternmark/keygen.hpp"
#include "patternmark/rng.hpp"

using namespace patternmark;

namespace {

WatermarkConfig config_with_transition(double a11) {
  return make_two_key_config("seed", 1.0, 3, a11);
}

}  // namespace

TEST_CASE("deterministic transition matrix forces strict alternation") {
  WatermarkConfig config = config_with_transition(0.0);  // [[0,1],[1,0]]
  RngStream rng("seed", "keygen");
  KeySequence keys = generate_key_sequence(config, 5, rng);
  REQUIRE(keys.size() == 5);
  for (std::size_t t = 1; t < keys.size(); ++t) {
    CHECK(keys[t] == 1 - keys[t - 1]);
  }
}

TEST_CASE("identity transition matrix freezes the first key") {
  WatermarkConfig config = config_with_transition(1.0);  // [[1,0],[0,1]]
  RngStream rng("seed", "keygen-identity");
  KeySequence keys = generate_key_sequence(config, 4, rng);
  REQUIRE(keys.size() == 4);
  for (KeyIndex k : keys) CHECK(k == keys[0]);
}

TEST_CASE("self-transition frequency matches the matrix") {
  // A = [[0.3,0.7],[0.7,0.3]]: a key repeats with probability 0.3.
  WatermarkConfig config = config_with_transition(0.3);
  RngStream rng("seed", "keygen-stats");
  const std::size_t n = 100'000;
  KeySequence keys = generate_key_sequence(config, n, rng);
  std::size_t same = 0;
  for (std::size_t t = 1; t < n; ++t) same += keys[t] == keys[t - 1];
  CHECK(std::abs(static_cast<double>(same) / (n - 1) - 0.3) < 0.01);
}

TEST_CASE("key sequences are length-correct and in range") {
  WatermarkConfig config = config_with_transition(0.5);
  RngStream rng("seed", "keygen-range");
  for (std::size_t n : {0u, 1u, 2u, 17u}) {
    KeySequence keys = generate_key_sequence(config, n, rng);
    CHECK(keys.size() == n);
    for (KeyIndex k : keys) CHECK(k < config.l);
  }
}

TEST_CASE("replaying the stream replays the sequence") {
  WatermarkConfig config = config_with_transition(0.3);
  RngStream a("seed", "replay");
  RngStream b("seed", "replay");
  CHECK(generate_key_sequence(config, 1000, a) ==
        generate_key_sequence(config, 1000, b));
}

TEST_CASE("count_patterns frozen examples") {
  PatternSet alt = PatternSet::alternating();
  CHECK(count_patterns({0, 1, 0, 1}, alt, 3, 2) == 2);
  CHECK(count_patterns({0, 0, 0}, alt, 3, 2) == 0);
  CHECK(count_patterns({0, 1}, alt, 3, 2) == 0);  // n < m

  // T = {k1k2} alone, m = 2: matches at the two 01 windows.
  PatternSet single = PatternSet::explicit_set({{0, 1}});
  CHECK(count_patterns({0, 1, 1, 0, 1}, single, 2, 2) == 2);
}

TEST_CASE("count_patterns agrees with a naive reference") {
  PatternSet alt = PatternSet::alternating();
  RngStream rng("seed", "count-ref");
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(30);
    const std::size_t m = 2 + rng.uniform_int(4);
    KeySequence keys(n);
    for (KeyIndex& k : keys) k = static_cast<KeyIndex>(rng.uniform_int(2));

    std::uint64_t naive = 0;
    if (n >= m) {
      for (std::size_t j = 0; j + m <= n; ++j) {
        bool alternating = true;
        for (std::size_t t = 1; t < m; ++t) {
          if (keys[j + t] == keys[j + t - 1]) {
            alternating = false;
            break;
          }
        }
        naive += alternating;
      }
    }
    CHECK(count_patterns(keys, alt, m, 2) == naive);
  }
}

TEST_CASE("alternating chain saturates the pattern count") {
  WatermarkConfig config = config_with_transition(0.0);
  RngStream rng("seed", "saturate");
  const std::size_t n = 64;
  KeySequence keys = generate_key_sequence(config, n, rng);
  for (std::size_t m : {2u, 3u, 5u, 8u}) {
    CHECK(count_patterns(keys, config.pattern_set, m, 2) == n - m + 1);
  }
}

TEST_CASE("count_patterns rejects out-of-range keys") {
  PatternSet alt = PatternSet::alternating();
  CHECK_THROWS_AS(count_patterns({0, 2, 0}, alt, 2, 2), ContractViolation);
}
