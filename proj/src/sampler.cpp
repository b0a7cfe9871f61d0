#include "patternmark/sampler.hpp"

#include <cmath>

#include "patternmark/errors.hpp"

namespace patternmark {

std::vector<double> shift_distribution(std::span<const double> probabilities,
                                       const VocabPartition& partition,
                                       KeyIndex key, double delta) {
  if (probabilities.size() != partition.vocab_size()) {
    throw ContractViolation("shift_distribution: vector size != vocab size");
  }
  if (key >= partition.key_count()) {
    throw ContractViolation("shift_distribution: key index out of range");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ContractViolation("shift_distribution: delta must be finite and >= 0");
  }
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ContractViolation("shift_distribution: negative or non-finite entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractViolation("shift_distribution: input does not sum to 1");
  }
  if (delta == 0.0) {
    // Promotion by a factor of 1 must not perturb the distribution, not
    // even in the last bit, so skip the renormalization round trip.
    return std::vector<double>(probabilities.begin(), probabilities.end());
  }
  const double boost = std::exp(delta);
  std::vector<double> shifted(probabilities.begin(), probabilities.end());
  double z = 0.0;
  for (TokenId t = 0; t < shifted.size(); ++t) {
    if (partition.key_of(t) == key && !partition.is_excluded(t)) {
      shifted[t] *= boost;
    }
    z += shifted[t];
  }
  for (double& p : shifted) p /= z;
  return shifted;
}

TokenSequence generate_watermarked(const DistributionOracle& oracle,
                                   const GenerationOrder& order,
                                   const WatermarkConfig& config,
                                   const VocabPartition& partition,
                                   const KeySequence& keys, RngStream& rng,
                                   GenerationStats* stats) {
  config.validate();
  order.validate();
  if (keys.size() != order.length) {
    throw ContractViolation("generate_watermarked: keys/order length mismatch");
  }
  if (oracle.vocab_size() != partition.vocab_size()) {
    throw ContractViolation("generate_watermarked: oracle/partition vocab mismatch");
  }
  for (KeyIndex k : keys) {
    if (k >= partition.key_count()) {
      throw ContractViolation("generate_watermarked: key index out of range");
    }
  }

  TokenSequence sequence(order.length, kGapToken);
  for (std::size_t position : order.visits) {
    std::vector<double> base = oracle.conditional(position, sequence);
    std::vector<double> shifted =
        shift_distribution(base, partition, keys[position], config.delta);
    TokenId token = static_cast<TokenId>(sample_index(shifted, rng));
    if (stats != nullptr) {
      // Quality proxy: surprisal of the emitted token under the unshifted
      // model. Guard against a zero that promotion made samplable.
      double p = base[token];
      stats->total_nll += -std::log(p > 0.0 ? p : 1e-300);
      ++stats->samples;
    }
    sequence[position] = token;
  }
  return sequence;
}

}  // namespace patternmark
