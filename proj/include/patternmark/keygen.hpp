#pragma once

#include <cstdint>

#include "patternmark/config.hpp"
#include "patternmark/rng.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

// Watermark key sequence from the config's Markov chain: the first key is
// drawn from the initial distribution, each later key from the transition
// row of its predecessor. Length exactly n. Sampling is inverse-CDF with a
// single variate per step, so runs replay bit-exactly from the stream.
KeySequence generate_key_sequence(const WatermarkConfig& config, std::size_t n,
                                  RngStream& rng);

// Number of windows keys[j .. j+m-1] that lie in the pattern set, summed
// over j = 0 .. n-m. Returns 0 when the sequence is shorter than m.
std::uint64_t count_patterns(const KeySequence& keys, const PatternSet& set,
                             std::size_t m, std::uint32_t l);

}  // namespace patternmark
