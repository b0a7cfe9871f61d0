#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace patternmark {

// Deterministic random stream derived from (secret seed, label). Distinct
// labels yield independent streams; the same (seed, label) replays the
// stream bit-exactly, on any platform. All variate transforms are done
// in-house because the standard <random> distributions are
// implementation-defined and would break cross-platform replay.
//
// Single-owner: not safe for concurrent use. Workers take one stream each
// under distinct labels.
class RngStream {
 public:
  RngStream(std::string_view secret_seed, std::string_view label);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Uniform integer in [0, bound); bound >= 1.
  std::uint64_t uniform_int(std::uint64_t bound);

  // Standard normal (Box-Muller).
  double normal();

  // Gamma(shape alpha, unit scale), alpha > 0 (Marsaglia-Tsang).
  double gamma(double alpha);

 private:
  std::mt19937_64 engine_;
};

// Inverse-CDF draw from an unnormalized nonnegative weight vector using a
// single variate from the stream. Returns an index with positive weight.
std::size_t sample_index(std::span<const double> weights, RngStream& rng);

}  // namespace patternmark
