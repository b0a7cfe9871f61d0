#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patternmark/config.hpp"
#include "patternmark/partition.hpp"
#include "patternmark/rng.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

// Conditional token distribution of an order-agnostic model. `context` is
// the current partially filled sequence; kGapToken marks unfilled slots.
// Implementations must return a nonnegative vector over [0, vocab_size())
// summing to 1 within 1e-9, and must be safe for concurrent queries.
class DistributionOracle {
 public:
  virtual ~DistributionOracle() = default;
  virtual std::uint32_t vocab_size() const = 0;
  virtual std::vector<double> conditional(std::size_t position,
                                          const TokenSequence& context) const = 0;
};

// Promotion of the key's vocabulary part: tokens of the part get their
// probability scaled by e^delta, everything renormalized. Excluded tokens
// pass through unpromoted. delta == 0 returns the input unchanged,
// bit-for-bit. Throws ContractViolation on a negative entry or an input
// not summing to 1 within 1e-9.
std::vector<double> shift_distribution(std::span<const double> probabilities,
                                       const VocabPartition& partition,
                                       KeyIndex key, double delta);

struct GenerationStats {
  // Negative log-likelihood of each sampled token under the unshifted model
  // distribution at the time it was sampled; revisits counted every time.
  double total_nll = 0.0;
  std::size_t samples = 0;

  double mean_nll() const { return samples == 0 ? 0.0 : total_nll / samples; }
};

// The watermarked generation loop. Walks the visitation schedule; at each
// visit of position p it queries the oracle, promotes the part selected by
// keys[p] and samples one token into p. Keys are indexed by position, not
// by step, so a position keeps its key no matter when (or how often) it is
// generated. Returns a fully filled sequence.
TokenSequence generate_watermarked(const DistributionOracle& oracle,
                                   const GenerationOrder& order,
                                   const WatermarkConfig& config,
                                   const VocabPartition& partition,
                                   const KeySequence& keys, RngStream& rng,
                                   GenerationStats* stats = nullptr);

}  // namespace patternmark
