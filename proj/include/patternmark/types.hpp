#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace patternmark {

using TokenId = std::uint32_t;
using KeyIndex = std::uint32_t;

// Sentinel for a position that is not yet generated or is excluded from
// analysis. Never a valid token id.
inline constexpr TokenId kGapToken = std::numeric_limits<TokenId>::max();

// A sequence over key indices, each in [0, l).
using KeySequence = std::vector<KeyIndex>;

// A token sequence; entries are token ids in [0, vocab_size) or kGapToken.
using TokenSequence = std::vector<TokenId>;

// Position visitation schedule for an order-agnostic decoder. visits[i] is
// the position filled at step i. Every position in [0, length) must appear
// at least once; repeated visits are refinement passes that resample the
// position. A plain decoding order is the special case visits.size() == length.
struct GenerationOrder {
  std::size_t length = 0;
  std::vector<std::size_t> visits;

  bool is_permutation() const { return visits.size() == length; }

  // Throws ConfigError unless every visit is in range and every position
  // in [0, length) is visited at least once.
  void validate() const;
};

GenerationOrder identity_order(std::size_t n);

// Outcome of one detection run.
struct DetectionReport {
  std::uint64_t observed_count = 0;  // pattern (or green-token) count c
  std::uint64_t window_count = 0;    // number of counted windows, 0 if none
  double p_value = 1.0;
  bool watermarked = false;
  std::string config_digest;  // digest of (seed, l, m, T, partition)
};

}  // namespace patternmark
