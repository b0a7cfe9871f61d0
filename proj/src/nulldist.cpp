#include "patternmark/nulldist.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"

namespace patternmark {

namespace {

constexpr double kTailFloor = 1e-300;

void check_shape(std::uint32_t l, std::size_t n, std::size_t m) {
  if (l < 2) throw ConfigError("null distribution: l must be >= 2");
  if (m < 2) throw ConfigError("null distribution: m must be >= 2");
  if (n < m) throw ConfigError("null distribution: need n >= m");
}

void check_patterns(const std::vector<KeySequence>& patterns, std::uint32_t l,
                    std::size_t m) {
  if (patterns.empty()) {
    throw ConfigError("null distribution: empty pattern set");
  }
  for (const KeySequence& p : patterns) {
    if (p.size() != m) {
      throw ConfigError("null distribution: pattern of wrong length");
    }
    for (KeyIndex k : p) {
      if (k >= l) {
        throw ConfigError("null distribution: pattern key out of range");
      }
    }
  }
}

// l^e with overflow refusal; DP table sizes must stay addressable.
std::size_t checked_pow(std::uint32_t l, std::size_t e) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (v > (std::size_t{1} << 40) / l) {
      throw ConfigError("null distribution: state space l^(m-1) too large");
    }
    v *= l;
  }
  return v;
}

// Window membership table: in_set[code] for code = Σ key_t * l^(m-1-t).
std::vector<char> window_membership(const std::vector<KeySequence>& patterns,
                                    std::uint32_t l, std::size_t m,
                                    std::size_t window_space) {
  std::vector<char> in_set(window_space, 0);
  for (const KeySequence& p : patterns) {
    std::size_t code = 0;
    for (KeyIndex k : p) code = code * l + k;
    in_set[code] = 1;
  }
  return in_set;
}

}  // namespace

void NullDistribution::validate() const {
  if (mass.size() != n - m + 2) {
    throw ContractViolation("null distribution: mass has wrong support size");
  }
  double sum = 0.0;
  for (double p : mass) {
    if (!(p >= 0.0)) {
      throw ContractViolation("null distribution: negative mass");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ContractViolation("null distribution: mass does not sum to 1");
  }
}

NullDistribution pattern_distribution_general(
    std::uint32_t l, std::size_t n, std::size_t m,
    const std::vector<KeySequence>& patterns) {
  check_shape(l, n, m);
  check_patterns(patterns, l, m);

  const std::size_t state_space = checked_pow(l, m - 1);
  const std::size_t window_space = state_space * l;
  const std::size_t counts = n - m + 2;  // c in [0, n-m+1]
  const std::size_t drop_stride = state_space / l;  // l^(m-2)
  const std::vector<char> in_set = window_membership(patterns, l, m, window_space);
  const double step_prob = 1.0 / static_cast<double>(l);

  // layer[c * state_space + s] = Pr(count = c, last m-1 keys encode to s)
  // after the current number of keys. Start with m-1 keys on the board:
  // every prefix has weight (1/l)^(m-1) and nothing is counted yet.
  std::vector<double> layer(counts * state_space, 0.0);
  std::vector<double> next(counts * state_space, 0.0);
  const double init = std::pow(step_prob, static_cast<double>(m - 1));
  for (std::size_t s = 0; s < state_space; ++s) layer[s] = init;

  for (std::size_t t = m; t <= n; ++t) {
    const std::size_t max_count = t - m + 1;  // reachable counts this layer
    const std::size_t prev_max = max_count - 1;
    std::fill(next.begin(), next.begin() + (max_count + 1) * state_space, 0.0);
    // Iterate new states: s_new's last key is the key appended at step t;
    // predecessors prepend the dropped key and lose that last key.
    for (std::size_t s_new = 0; s_new < state_space; ++s_new) {
      const std::size_t tail = s_new / l;  // shared by all predecessors
      for (std::uint32_t dropped = 0; dropped < l; ++dropped) {
        const std::size_t s_old = dropped * drop_stride + tail;
        const std::size_t window = dropped * state_space + s_new;
        const std::size_t inc = in_set[window] ? 1 : 0;
        for (std::size_t c = 0; c <= prev_max; ++c) {
          next[(c + inc) * state_space + s_new] +=
              layer[c * state_space + s_old] * step_prob;
        }
      }
    }
    layer.swap(next);
  }

  NullDistribution dist;
  dist.n = n;
  dist.m = m;
  dist.mass.assign(counts, 0.0);
  for (std::size_t c = 0; c < counts; ++c) {
    double sum = 0.0;
    for (std::size_t s = 0; s < state_space; ++s) {
      sum += layer[c * state_space + s];
    }
    dist.mass[c] = sum;
  }
  dist.validate();
  return dist;
}

NullDistribution pattern_distribution_alternating(std::size_t n, std::size_t m) {
  check_shape(2, n, m);
  if (m == 2) {
    // The tail state degenerates at m=2; the general program is already
    // O(n^2) there.
    return pattern_distribution_general(
        2, n, m, PatternSet::alternating().materialize(m, 2));
  }

  const std::size_t counts = n - m + 2;
  const std::size_t tails = m - 1;  // alternating tail length M in [1, m-1]
  // layer[c * tails + (M-1)] = Pr(count = c, alternating tail of length
  // min(run, m-1) = M) after t keys. One key on the board: M = 1.
  std::vector<double> layer(counts * tails, 0.0);
  std::vector<double> next(counts * tails, 0.0);
  layer[0] = 1.0;

  for (std::size_t t = 2; t <= n; ++t) {
    const std::size_t max_count = t < m ? 0 : t - m + 1;
    std::fill(next.begin(), next.begin() + (max_count + 1) * tails, 0.0);
    const std::size_t prev_max = t - 1 < m ? 0 : t - m;
    for (std::size_t c = 0; c <= prev_max; ++c) {
      const double* row = layer.data() + c * tails;
      double* out = next.data() + c * tails;
      double row_sum = 0.0;
      for (std::size_t i = 0; i < tails; ++i) row_sum += row[i];
      // Same key as the last: every tail collapses to M = 1.
      out[0] += row_sum * 0.5;
      // Different key: the tail grows; from M = m-1 a window completes.
      for (std::size_t i = 0; i + 1 < tails; ++i) {
        out[i + 1] += row[i] * 0.5;
      }
      next[(c + 1) * tails + (tails - 1)] += row[tails - 1] * 0.5;
    }
    layer.swap(next);
  }

  NullDistribution dist;
  dist.n = n;
  dist.m = m;
  dist.mass.assign(counts, 0.0);
  for (std::size_t c = 0; c < counts; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < tails; ++i) sum += layer[c * tails + i];
    dist.mass[c] = sum;
  }
  dist.validate();
  return dist;
}

NullDistribution brute_force_distribution(std::uint32_t l, std::size_t n,
                                          std::size_t m,
                                          const std::vector<KeySequence>& patterns) {
  check_shape(l, n, m);
  check_patterns(patterns, l, m);
  double sequences = std::pow(static_cast<double>(l), static_cast<double>(n));
  if (sequences > static_cast<double>(std::size_t{1} << 24)) {
    throw ConfigError("brute force: l^n exceeds the 2^24 enumeration bound");
  }

  const std::size_t state_space = checked_pow(l, m - 1);
  const std::size_t window_space = state_space * l;
  const std::vector<char> in_set = window_membership(patterns, l, m, window_space);
  std::vector<std::uint64_t> hist(n - m + 2, 0);

  // Depth-first enumeration carrying the rolling (m-1)-key prefix code and
  // the running count; exact integer tallies at the leaves.
  struct Frame {
    std::size_t depth;
    std::size_t prefix;
    std::size_t count;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0, 0});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.depth == n) {
      ++hist[f.count];
      continue;
    }
    for (std::uint32_t k = 0; k < l; ++k) {
      Frame child;
      child.depth = f.depth + 1;
      if (f.depth + 1 < m) {
        child.prefix = f.prefix * l + k;
        child.count = f.count;
      } else {
        const std::size_t window = f.prefix * l + k;
        child.prefix = window % state_space;
        child.count = f.count + (in_set[window] ? 1 : 0);
      }
      stack.push_back(child);
    }
  }

  NullDistribution dist;
  dist.n = n;
  dist.m = m;
  dist.mass.assign(hist.size(), 0.0);
  const double total = std::pow(static_cast<double>(l), static_cast<double>(n));
  for (std::size_t c = 0; c < hist.size(); ++c) {
    dist.mass[c] = static_cast<double>(hist[c]) / total;
  }
  dist.validate();
  return dist;
}

NullDistribution compute_distribution(std::uint32_t l, std::size_t n,
                                      std::size_t m, const PatternSet& set) {
  if (set.kind == PatternKind::kAlternating && l == 2 && m >= 3) {
    return pattern_distribution_alternating(n, m);
  }
  return pattern_distribution_general(l, n, m, set.materialize(m, l));
}

double tail_probability(const NullDistribution& dist, std::uint64_t c) {
  if (c == 0) return 1.0;
  if (c > dist.max_count()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = dist.max_count() + 1; i-- > c;) {
    sum += dist.mass[i];
  }
  if (sum < kTailFloor) return kTailFloor;
  return std::min(sum, 1.0);
}

std::shared_ptr<const NullDistribution> NullDistributionCache::get(
    std::uint32_t l, std::size_t n, std::size_t m, const PatternSet& set) {
  DigestWriter w("patternmark.nulldist.v1");
  w.u32(l).u64(n).u64(m).str(set.name());
  if (set.kind == PatternKind::kExplicit) {
    for (const KeySequence& p : set.patterns) {
      w.u64(p.size());
      for (KeyIndex k : p) w.u32(k);
    }
  }
  const std::string key = w.finish_hex();

  {
    std::shared_lock lock(mutex_);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
  }
  auto dist =
      std::make_shared<const NullDistribution>(compute_distribution(l, n, m, set));
  std::unique_lock lock(mutex_);
  auto [it, inserted] = table_.emplace(key, std::move(dist));
  return it->second;
}

std::size_t NullDistributionCache::size() const {
  std::shared_lock lock(mutex_);
  return table_.size();
}

NullDistributionCache& NullDistributionCache::global() {
  static NullDistributionCache cache;
  return cache;
}

}  // namespace patternmark
