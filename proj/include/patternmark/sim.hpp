#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "patternmark/rng.hpp"
#include "patternmark/sampler.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

enum class OracleKind {
  kIidDirichlet,  // one Dirichlet draw per position, context ignored
  kContextHash,   // re-drawn per (position, context digest)
};

OracleKind parse_oracle_kind(const std::string& name);
std::string oracle_kind_name(OracleKind kind);

// Builds a synthetic next-token distribution oracle.
//
// entropy_knob is the symmetric Dirichlet concentration: small values give
// peaked (low-entropy) conditionals, large values flatten toward uniform.
// Oracles are deterministic in (kind, oracle_seed, position, context) and
// safe to call from multiple threads.
std::unique_ptr<DistributionOracle> make_oracle(OracleKind kind,
                                                std::uint32_t vocab_size,
                                                double entropy_knob,
                                                std::string_view oracle_seed);

enum class OrderKind {
  kLeftToRight,
  kRandomPermutation,
  kMaskPredictRounds,
};

OrderKind parse_order_kind(const std::string& name);
std::string order_kind_name(OrderKind kind);

// Builds a visitation schedule over n positions.
//
// kLeftToRight: 0..n-1. kRandomPermutation: one stream-drawn shuffle.
// kMaskPredictRounds: round 1 fills all positions in ascending order, then
// each round r in 2..rounds revisits a stream-drawn subset of
// floor(n*(rounds-r+1)/rounds) positions, ascending within the round.
// rounds is ignored except for kMaskPredictRounds.
GenerationOrder make_order(OrderKind kind, std::size_t n, std::size_t rounds,
                           RngStream& rng);

// Substitution attack: picks k = floor(epsilon*n + 0.5) distinct positions
// and replaces each token with a uniform draw over the vocabulary minus
// the original token. epsilon must lie in [0, 1].
TokenSequence random_token_attack(const TokenSequence& tokens,
                                  std::uint32_t vocab_size, double epsilon,
                                  RngStream& rng);

}  // namespace patternmark
