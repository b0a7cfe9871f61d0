#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patternmark/types.hpp"

namespace patternmark {

enum class PatternKind { kAlternating, kExplicit };

// The set T of length-m key strings whose occurrence count is the detection
// statistic. The alternating set is the two strings over two keys in which
// the keys strictly alternate.
struct PatternSet {
  PatternKind kind = PatternKind::kAlternating;
  std::vector<KeySequence> patterns;  // kExplicit only

  static PatternSet alternating();
  static PatternSet explicit_set(std::vector<KeySequence> patterns);

  // The concrete length-m patterns over l keys. Validates shape.
  std::vector<KeySequence> materialize(std::size_t m, std::uint32_t l) const;

  std::string name() const;  // "alternating" or "explicit"
};

struct WatermarkConfig {
  std::string secret_seed;                       // opaque byte string
  std::uint32_t l = 2;                           // key space dimension
  std::vector<std::vector<double>> transition;   // A, l x l row-stochastic
  std::vector<double> initial;                   // Q, length l
  double delta = 0.0;                            // promotion strength
  std::size_t m = 3;                             // pattern length
  PatternSet pattern_set;
  double fpr_threshold = 1e-3;                   // decision threshold f

  // Throws ConfigError on any invariant violation: non-stochastic A or Q
  // (1e-12 tolerance), negative delta, m < 2, alternating set with l != 2,
  // explicit patterns of the wrong length or duplicated, f outside (0, 1].
  void validate() const;

  // Digest over every field; identifies the full configuration.
  std::string digest() const;
};

// The two-key family with transition [[a11, 1-a11], [1-a11, a11]], uniform
// initial distribution and the alternating pattern set.
WatermarkConfig make_two_key_config(std::string secret_seed, double delta,
                                    std::size_t m, double a11 = 0.0,
                                    double fpr_threshold = 1e-3);

}  // namespace patternmark
