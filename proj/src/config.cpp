#include "patternmark/config.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"

namespace patternmark {

namespace {

constexpr double kStochasticTolerance = 1e-12;

void check_distribution(const std::vector<double>& row, const char* what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ConfigError(std::string(what) + ": entries must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw ConfigError(std::string(what) + ": entries must sum to 1");
  }
}

}  // namespace

PatternSet PatternSet::alternating() {
  PatternSet set;
  set.kind = PatternKind::kAlternating;
  return set;
}

PatternSet PatternSet::explicit_set(std::vector<KeySequence> patterns) {
  PatternSet set;
  set.kind = PatternKind::kExplicit;
  set.patterns = std::move(patterns);
  return set;
}

std::vector<KeySequence> PatternSet::materialize(std::size_t m,
                                                 std::uint32_t l) const {
  if (m < 2) throw ConfigError("pattern set: m must be >= 2");
  if (l < 2) throw ConfigError("pattern set: l must be >= 2");
  if (kind == PatternKind::kAlternating) {
    if (l != 2) {
      throw ConfigError("pattern set: alternating patterns need exactly 2 keys");
    }
    std::vector<KeySequence> out(2, KeySequence(m));
    for (std::size_t t = 0; t < m; ++t) {
      out[0][t] = static_cast<KeyIndex>(t % 2);        // 0101...
      out[1][t] = static_cast<KeyIndex>(1 - t % 2);    // 1010...
    }
    return out;
  }
  if (patterns.empty()) throw ConfigError("pattern set: empty explicit set");
  std::set<KeySequence> distinct;
  for (const KeySequence& p : patterns) {
    if (p.size() != m) {
      throw ConfigError("pattern set: explicit pattern of wrong length");
    }
    for (KeyIndex k : p) {
      if (k >= l) throw ConfigError("pattern set: key index out of range");
    }
    if (!distinct.insert(p).second) {
      throw ConfigError("pattern set: duplicate pattern");
    }
  }
  return patterns;
}

std::string PatternSet::name() const {
  return kind == PatternKind::kAlternating ? "alternating" : "explicit";
}

void WatermarkConfig::validate() const {
  if (l < 2) throw ConfigError("config: l must be >= 2");
  if (m < 2) throw ConfigError("config: m must be >= 2");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("config: delta must be finite and >= 0");
  }
  if (!(fpr_threshold > 0.0) || fpr_threshold > 1.0) {
    throw ConfigError("config: fpr threshold must lie in (0, 1]");
  }
  if (initial.size() != l) {
    throw ConfigError("config: initial distribution must have l entries");
  }
  check_distribution(initial, "config initial distribution");
  if (transition.size() != l) {
    throw ConfigError("config: transition matrix must have l rows");
  }
  for (const auto& row : transition) {
    if (row.size() != l) {
      throw ConfigError("config: transition matrix rows must have l entries");
    }
    check_distribution(row, "config transition row");
  }
  pattern_set.materialize(m, l);  // shape check
}

std::string WatermarkConfig::digest() const {
  DigestWriter w("patternmark.config.v1");
  w.str(secret_seed).u32(l).f64(delta).u64(m).f64(fpr_threshold);
  for (double q : initial) w.f64(q);
  for (const auto& row : transition) {
    for (double a : row) w.f64(a);
  }
  w.str(pattern_set.name());
  if (pattern_set.kind == PatternKind::kExplicit) {
    w.u64(pattern_set.patterns.size());
    for (const KeySequence& p : pattern_set.patterns) {
      w.u64(p.size());
      for (KeyIndex k : p) w.u32(k);
    }
  }
  return w.finish_hex();
}

WatermarkConfig make_two_key_config(std::string secret_seed, double delta,
                                    std::size_t m, double a11,
                                    double fpr_threshold) {
  WatermarkConfig config;
  config.secret_seed = std::move(secret_seed);
  config.l = 2;
  config.transition = {{a11, 1.0 - a11}, {1.0 - a11, a11}};
  config.initial = {0.5, 0.5};
  config.delta = delta;
  config.m = m;
  config.pattern_set = PatternSet::alternating();
  config.fpr_threshold = fpr_threshold;
  config.validate();
  return config;
}

}  // namespace patternmark
