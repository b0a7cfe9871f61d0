#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "patternmark/config.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

// Exact law of the pattern count over length-n key sequences drawn i.i.d.
// uniform from l keys. mass[c] = Pr(count = c) for c in [0, n-m+1].
struct NullDistribution {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> mass;

  std::size_t max_count() const { return mass.empty() ? 0 : mass.size() - 1; }

  // Nonnegative entries summing to 1 within 1e-9.
  void validate() const;
};

// General dynamic program over states (count, last m-1 keys). Layers are
// kept two at a time, so memory is O(n * l^(m-1)) while time stays
// O(n^2 * l^m). Patterns inside the first m-1 keys are never counted; the
// first window completes at position m. Requires 2 <= m <= n and a
// non-empty pattern list (each of length m over keys < l).
NullDistribution pattern_distribution_general(
    std::uint32_t l, std::size_t n, std::size_t m,
    const std::vector<KeySequence>& patterns);

// Specialization for the two alternating patterns over two keys, tracking
// (count, alternating tail length capped at m-1) in O(n^2 * m) time.
// Requires m >= 3 and n >= m; m == 2 delegates to the general program.
NullDistribution pattern_distribution_alternating(std::size_t n, std::size_t m);

// Ground-truth oracle: enumerates all l^n key sequences and counts matches
// with integer arithmetic. Refuses when l^n > 2^24.
NullDistribution brute_force_distribution(std::uint32_t l, std::size_t n,
                                          std::size_t m,
                                          const std::vector<KeySequence>& patterns);

// Routes to the alternating specialization when it applies (alternating
// set, l == 2, m >= 3), otherwise to the general program.
NullDistribution compute_distribution(std::uint32_t l, std::size_t n,
                                      std::size_t m, const PatternSet& set);

// Upper tail Pr(count >= c), summed smallest terms first. Returns 1 when
// c == 0 and 0 beyond the support. Within the support the result is floored
// at 1e-300: any count in range has positive probability, so smaller values
// are reported as the floor rather than as an underflowed zero.
double tail_probability(const NullDistribution& dist, std::uint64_t c);

// Process-wide cache of null distributions keyed by (l, n, m, pattern set).
// Safe for concurrent lookup and insert.
class NullDistributionCache {
 public:
  std::shared_ptr<const NullDistribution> get(std::uint32_t l, std::size_t n,
                                              std::size_t m,
                                              const PatternSet& set);
  std::size_t size() const;

  static NullDistributionCache& global();

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const NullDistribution>> table_;
};

}  // namespace patternmark
