#pragma once

#include <cstdint>
#include <vector>

#include "patternmark/config.hpp"
#include "patternmark/nulldist.hpp"
#include "patternmark/partition.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

// Keys recovered from a token sequence. Gaps and excluded tokens are
// dropped; run_lengths records the maximal contiguous runs between them
// (summing to keys.size()), so windows never span a break.
struct RecoveredKeys {
  KeySequence keys;
  std::vector<std::size_t> run_lengths;
};

// key[i] = partition assignment of tokens[i]. Throws InputError when a
// non-gap token id is outside the partition's vocabulary.
RecoveredKeys recover_keys(const TokenSequence& tokens,
                           const VocabPartition& partition);

// Full detection pipeline: recover keys, count pattern occurrences within
// contiguous runs, compute the exact upper-tail p-value for the effective
// length n' (total recovered keys), decide p <= f. Counting only within
// runs makes the test conservative on broken inputs. When n' < m the
// report is degenerate: count 0, p-value 1, not watermarked.
DetectionReport detect(const TokenSequence& tokens,
                       const WatermarkConfig& config,
                       const VocabPartition& partition,
                       NullDistributionCache* cache = nullptr);

// Fixed green-list comparison baseline: counts tokens of one part and
// tests the count against an exact binomial upper tail with success
// probability |V_green| / N.
DetectionReport detect_greenlist_baseline(const TokenSequence& tokens,
                                          const VocabPartition& partition,
                                          KeyIndex green_key,
                                          double fpr_threshold);

// Pr(Binomial(n, p) >= c), exact up to double rounding.
double binomial_upper_tail(std::uint64_t n, std::uint64_t c, double p);

// Digest carried by detection reports: (seed, l, m, T, partition).
std::string detection_digest(const WatermarkConfig& config,
                             const VocabPartition& partition);

}  // namespace patternmark
