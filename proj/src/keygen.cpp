#include "patternmark/keygen.hpp"

#include <algorithm>

#include "patternmark/errors.hpp"

namespace patternmark {

KeySequence generate_key_sequence(const WatermarkConfig& config, std::size_t n,
                                  RngStream& rng) {
  config.validate();
  KeySequence keys;
  keys.reserve(n);
  if (n == 0) return keys;
  KeyIndex current =
      static_cast<KeyIndex>(sample_index(config.initial, rng));
  keys.push_back(current);
  for (std::size_t t = 1; t < n; ++t) {
    current = static_cast<KeyIndex>(
        sample_index(config.transition[current], rng));
    keys.push_back(current);
  }
  return keys;
}

std::uint64_t count_patterns(const KeySequence& keys, const PatternSet& set,
                             std::size_t m, std::uint32_t l) {
  for (KeyIndex k : keys) {
    if (k >= l) throw ContractViolation("count_patterns: key index out of range");
  }
  if (keys.size() < m) return 0;
  const std::vector<KeySequence> patterns = set.materialize(m, l);
  std::uint64_t count = 0;
  for (std::size_t j = 0; j + m <= keys.size(); ++j) {
    for (const KeySequence& p : patterns) {
      if (std::equal(p.begin(), p.end(), keys.begin() + j)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace patternmark
