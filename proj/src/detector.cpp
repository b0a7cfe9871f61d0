#include "patternmark/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"
#include "patternmark/keygen.hpp"

namespace patternmark {

RecoveredKeys recover_keys(const TokenSequence& tokens,
                           const VocabPartition& partition) {
  RecoveredKeys out;
  std::size_t run = 0;
  for (TokenId token : tokens) {
    if (token == kGapToken || partition.is_excluded(token)) {
      if (token != kGapToken) partition.key_of(token);  // range check still applies
      if (run > 0) {
        out.run_lengths.push_back(run);
        run = 0;
      }
      continue;
    }
    out.keys.push_back(partition.key_of(token));
    ++run;
  }
  if (run > 0) out.run_lengths.push_back(run);
  return out;
}

std::string detection_digest(const WatermarkConfig& config,
                             const VocabPartition& partition) {
  DigestWriter w("patternmark.detection.v1");
  w.str(config.secret_seed).u32(config.l).u64(config.m);
  w.str(config.pattern_set.name());
  if (config.pattern_set.kind == PatternKind::kExplicit) {
    w.u64(config.pattern_set.patterns.size());
    for (const KeySequence& p : config.pattern_set.patterns) {
      w.u64(p.size());
      for (KeyIndex k : p) w.u32(k);
    }
  }
  w.str(partition.digest());
  return w.finish_hex();
}

DetectionReport detect(const TokenSequence& tokens, const WatermarkConfig& config,
                       const VocabPartition& partition,
                       NullDistributionCache* cache) {
  config.validate();
  if (config.l != partition.key_count()) {
    throw InputError("detect: config key count != partition key count");
  }

  DetectionReport report;
  report.config_digest = detection_digest(config, partition);

  const RecoveredKeys recovered = recover_keys(tokens, partition);
  const std::size_t effective_n = recovered.keys.size();
  const std::size_t m = config.m;
  if (effective_n < m) return report;  // degenerate: p = 1, not watermarked

  // Count within maximal contiguous runs so no window spans a break; the
  // null is evaluated at the concatenated length, which can only overstate
  // the p-value (the test stays conservative on broken inputs).
  std::uint64_t count = 0;
  std::uint64_t windows = 0;
  std::size_t offset = 0;
  for (std::size_t len : recovered.run_lengths) {
    if (len >= m) {
      KeySequence run(recovered.keys.begin() + offset,
                      recovered.keys.begin() + offset + len);
      count += count_patterns(run, config.pattern_set, m, config.l);
      windows += len - m + 1;
    }
    offset += len;
  }

  report.observed_count = count;
  report.window_count = windows;
  if (cache != nullptr) {
    auto dist = cache->get(config.l, effective_n, m, config.pattern_set);
    report.p_value = tail_probability(*dist, count);
  } else {
    NullDistribution dist =
        compute_distribution(config.l, effective_n, m, config.pattern_set);
    report.p_value = tail_probability(dist, count);
  }
  report.watermarked = report.p_value <= config.fpr_threshold;
  return report;
}

double binomial_upper_tail(std::uint64_t n, std::uint64_t c, double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw ContractViolation("binomial tail: p must lie in [0, 1]");
  }
  if (c == 0) return 1.0;
  if (c > n) return 0.0;
  if (p == 0.0) return 0.0;  // c >= 1 is impossible
  if (p == 1.0) return 1.0;  // all n trials succeed and c <= n

  // Terms by the standard log-gamma formula for the first one, then the
  // exact multiplicative recurrence; summed smallest-first (the tail decays
  // away from the mode, so that is back-to-front).
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double nd = static_cast<double>(n);
  const double cd = static_cast<double>(c);
  double log_term = std::lgamma(nd + 1.0) - std::lgamma(cd + 1.0) -
                    std::lgamma(nd - cd + 1.0) + cd * log_p + (nd - cd) * log_q;
  const double ratio = p / (1.0 - p);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n - c) + 1);
  double term = std::exp(log_term);
  for (std::uint64_t i = c;; ++i) {
    terms.push_back(term);
    if (i == n) break;
    term *= ratio * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  double sum = 0.0;
  for (std::size_t i = terms.size(); i-- > 0;) sum += terms[i];
  if (sum < 1e-300) return 1e-300;
  return std::min(sum, 1.0);
}

DetectionReport detect_greenlist_baseline(const TokenSequence& tokens,
                                          const VocabPartition& partition,
                                          KeyIndex green_key,
                                          double fpr_threshold) {
  if (green_key >= partition.key_count()) {
    throw InputError("greenlist baseline: green key out of range");
  }
  if (!(fpr_threshold > 0.0) || fpr_threshold > 1.0) {
    throw ConfigError("greenlist baseline: fpr threshold must lie in (0, 1]");
  }

  DetectionReport report;
  report.config_digest = DigestWriter("patternmark.greenlist.v1")
                             .u32(green_key)
                             .str(partition.digest())
                             .finish_hex();
  std::uint64_t effective_n = 0;
  std::uint64_t green = 0;
  for (TokenId token : tokens) {
    if (token == kGapToken) continue;
    KeyIndex key = partition.key_of(token);
    if (partition.is_excluded(token)) continue;
    ++effective_n;
    if (key == green_key) ++green;
  }
  report.observed_count = green;
  report.window_count = effective_n;
  if (effective_n == 0) return report;

  const double rho = static_cast<double>(partition.part_size(green_key)) /
                     static_cast<double>(partition.vocab_size());
  report.p_value = binomial_upper_tail(effective_n, green, rho);
  report.watermarked = report.p_value <= fpr_threshold;
  return report;
}

}  // namespace patternmark
