// Acceptance suite: one line of output per criterion, PASS or FAIL, with
// the measured quantities and the pinned limits. Run with no arguments for
// all criteria, or pass criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "patternmark/config.hpp"
#include "patternmark/detector.hpp"
#include "patternmark/errors.hpp"
#include "patternmark/keygen.hpp"
#include "patternmark/nulldist.hpp"
#include "patternmark/partition.hpp"
#include "patternmark/rng.hpp"
#include "patternmark/sampler.hpp"
#include "patternmark/sim.hpp"
#include "patternmark/types.hpp"

using namespace patternmark;

namespace {

// Pinned tolerances and budgets. These are the contract; do not tune them
// to make a run pass.
constexpr double kDpTolerance = 1e-12;           // criteria 1, 2
constexpr double kAlgebraTolerance = 1e-9;       // criterion 4
constexpr double kFprInflationLimit = 1.5;       // criterion 3
constexpr double kKsAlpha = 0.01;                // criterion 3
constexpr double kTransitionTolerance = 0.005;   // criterion 8
constexpr double kTprFloorAtTopDelta = 0.99;     // criterion 5
constexpr double kRobustnessBaseTpr = 0.95;      // criterion 6
constexpr double kBinomialAlpha = 0.01;          // criterion 6
constexpr double kDpBudgetSeconds = 300.0;       // criterion 1
constexpr double kFprBudgetSeconds = 600.0;      // criterion 3
constexpr double kTrendBudgetSeconds = 900.0;    // criterion 5
constexpr double kWarmBudgetSeconds = 1.0;       // criterion 9
constexpr double kColdBudgetSeconds = 60.0;      // criterion 9

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

double max_mass_diff(const NullDistribution& a, const NullDistribution& b) {
  if (a.mass.size() != b.mass.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < a.mass.size(); ++c) {
    worst = std::max(worst, std::abs(a.mass[c] - b.mass[c]));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Criterion 1: the general dynamic program agrees with exhaustive
// enumeration on random pattern sets.

std::vector<KeySequence> random_pattern_set(std::uint32_t l, std::size_t m,
                                            RngStream& rng) {
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < m; ++i) space *= l;
  const std::uint64_t want = 1 + rng.uniform_int(std::min<std::uint64_t>(4, space));
  std::set<std::uint64_t> codes;
  while (codes.size() < want) codes.insert(rng.uniform_int(space));
  std::vector<KeySequence> patterns;
  for (std::uint64_t code : codes) {
    KeySequence pattern(m);
    std::uint64_t rest = code;
    for (std::size_t i = m; i-- > 0;) {
      pattern[i] = static_cast<KeyIndex>(rest % l);
      rest /= l;
    }
    patterns.push_back(std::move(pattern));
  }
  return patterns;
}

Outcome criterion1() {
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t sets = 0;
  for (std::uint32_t l : {2u, 3u}) {
    for (std::size_t m : {2u, 3u, 4u}) {
      for (int trial = 0; trial < 20; ++trial) {
        RngStream rng("acceptance.c1", "l" + std::to_string(l) + ".m" +
                                           std::to_string(m) + ".t" +
                                           std::to_string(trial));
        const std::vector<KeySequence> patterns = random_pattern_set(l, m, rng);
        ++sets;
        for (std::size_t n = m; n <= 12; ++n) {
          const NullDistribution dp = pattern_distribution_general(l, n, m, patterns);
          const NullDistribution exact = brute_force_distribution(l, n, m, patterns);
          worst = std::max(worst, max_mass_diff(dp, exact));
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = worst <= kDpTolerance && elapsed < kDpBudgetSeconds;
  out.detail = "max entry diff " + fmt(worst) + " (limit " + fmt(kDpTolerance) +
               ") over " + std::to_string(sets) + " pattern sets, n<=12; " +
               fmt(elapsed) + "s (budget " + fmt(kDpBudgetSeconds) + "s)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: the alternating specialization agrees with the general
// program, and reproduces the hand-counted n=4, m=3 law {5/8, 1/4, 1/8}.

Outcome criterion2() {
  const std::vector<KeySequence> alternating =
      PatternSet::alternating().materialize(3, 2);
  double worst = 0.0;
  for (std::size_t m = 3; m <= 6; ++m) {
    const std::vector<KeySequence> patterns =
        PatternSet::alternating().materialize(m, 2);
    for (std::size_t n = m; n <= 60; ++n) {
      const NullDistribution fast = pattern_distribution_alternating(n, m);
      const NullDistribution slow = pattern_distribution_general(2, n, m, patterns);
      worst = std::max(worst, max_mass_diff(fast, slow));
    }
  }
  const NullDistribution anchor = pattern_distribution_alternating(4, 3);
  const std::vector<double> expected = {5.0 / 8.0, 1.0 / 4.0, 1.0 / 8.0};
  double anchor_diff = anchor.mass.size() == expected.size()
                           ? 0.0
                           : std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < anchor.mass.size() && c < expected.size(); ++c) {
    anchor_diff = std::max(anchor_diff, std::abs(anchor.mass[c] - expected[c]));
  }
  Outcome out;
  out.pass = worst <= kDpTolerance && anchor_diff <= kDpTolerance;
  out.detail = "max engine diff " + fmt(worst) + " over m in 3..6, n<=60; anchor" +
               " n=4 m=3 diff " + fmt(anchor_diff) + " (limit " +
               fmt(kDpTolerance) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: on uniform-random token sequences the detector's empirical
// false positive rate never exceeds 1.5x the threshold, and its p-values
// stochastically dominate the uniform law (one-sided KS).

Outcome criterion3() {
  const auto start = Clock::now();
  const std::size_t runs = 10000;
  const std::size_t n = 400;
  const VocabPartition partition = build_partition("acceptance.c3.partition", 20, 2);
  const WatermarkConfig config = make_two_key_config("acceptance.c3.key", 0.0, 5);
  NullDistributionCache cache;
  std::vector<double> p_values;
  p_values.reserve(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    RngStream rng("acceptance.c3", "seq." + std::to_string(i));
    TokenSequence tokens(n);
    for (std::size_t j = 0; j < n; ++j) {
      tokens[j] = static_cast<TokenId>(rng.uniform_int(20));
    }
    p_values.push_back(detect(tokens, config, partition, &cache).p_value);
  }
  double fpr1 = 0.0, fpr2 = 0.0;
  for (double p : p_values) {
    fpr1 += p <= 0.1;
    fpr2 += p <= 0.01;
  }
  fpr1 /= static_cast<double>(runs);
  fpr2 /= static_cast<double>(runs);

  // One-sided KS: D+ = sup_x (F_hat(x) - x). Super-uniform p-values keep
  // the empirical CDF at or below the diagonal, so D+ must stay under the
  // alpha = 0.01 critical value sqrt(ln(1/alpha) / (2 runs)).
  std::sort(p_values.begin(), p_values.end());
  double d_plus = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    d_plus = std::max(
        d_plus, static_cast<double>(i + 1) / static_cast<double>(runs) - p_values[i]);
  }
  const double ks_critical =
      std::sqrt(std::log(1.0 / kKsAlpha) / (2.0 * static_cast<double>(runs)));
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = fpr1 <= kFprInflationLimit * 0.1 && fpr2 <= kFprInflationLimit * 0.01 &&
             d_plus <= ks_critical && elapsed < kFprBudgetSeconds;
  out.detail = "fpr@0.1 " + fmt(fpr1) + " (limit 0.15), fpr@0.01 " + fmt(fpr2) +
               " (limit 0.015), KS D+ " + fmt(d_plus) + " (critical " +
               fmt(ks_critical) + "); " + fmt(elapsed) + "s (budget " +
               fmt(kFprBudgetSeconds) + "s)";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 4: promotion algebra. Normalization, cross-part ratio scaling
// by e^delta, and bit-exact identity at delta = 0.

Outcome criterion4() {
  const VocabPartition partition = build_partition("acceptance.c4.partition", 20, 2);
  RngStream rng("acceptance.c4", "vectors");
  double worst_norm = 0.0;
  double worst_ratio = 0.0;
  std::size_t identity_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> probs(20);
    double total = 0.0;
    for (double& v : probs) {
      v = rng.uniform() + 1e-6;
      total += v;
    }
    if (trial % 7 == 0) {
      // Exercise zero entries too; renormalize what is left.
      const std::size_t hole = rng.uniform_int(20);
      total -= probs[hole];
      probs[hole] = 0.0;
    }
    for (double& v : probs) v /= total;

    const KeyIndex key = static_cast<KeyIndex>(rng.uniform_int(2));
    const double delta = 8.0 * rng.uniform();
    const std::vector<double> shifted = shift_distribution(probs, partition, key, delta);

    double sum = 0.0;
    for (double v : shifted) sum += v;
    worst_norm = std::max(worst_norm, std::abs(sum - 1.0));

    const double scale = std::exp(delta);
    for (TokenId t = 0; t < 20; ++t) {
      if (partition.key_of(t) != key || probs[t] <= 0.0) continue;
      for (TokenId s = 0; s < 20; ++s) {
        if (partition.key_of(s) == key || probs[s] <= 0.0) continue;
        const double observed = (shifted[t] * probs[s]) / (shifted[s] * probs[t]);
        worst_ratio = std::max(worst_ratio, std::abs(observed - scale) / scale);
      }
    }

    const std::vector<double> unshifted = shift_distribution(probs, partition, key, 0.0);
    if (unshifted.size() != probs.size() ||
        std::memcmp(unshifted.data(), probs.data(),
                    probs.size() * sizeof(double)) != 0) {
      ++identity_failures;
    }
  }
  Outcome out;
  out.pass = worst_norm <= kAlgebraTolerance && worst_ratio <= kAlgebraTolerance &&
             identity_failures == 0;
  out.detail = "norm err " + fmt(worst_norm) + ", ratio rel err " + fmt(worst_ratio) +
               " (limit " + fmt(kAlgebraTolerance) + "), delta=0 bit mismatches " +
               std::to_string(identity_failures) + "/1000";
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 5 and 6 share one synthetic-model pipeline: watermark with the
// alternating two-key configuration on a Dirichlet oracle, detect at the
// 0.1% threshold.

constexpr std::size_t kCellCount = 500;
constexpr std::size_t kCellN = 400;
constexpr std::size_t kCellM = 5;
const double kDeltaGrid[] = {0.5, 1.0, 1.5, 2.0, 4.0};

struct Pipeline {
  VocabPartition partition = build_partition("acceptance.cell.partition", 20, 2);
  std::unique_ptr<DistributionOracle> oracle =
      make_oracle(OracleKind::kIidDirichlet, 20, 0.5, "acceptance.cell.oracle");
  NullDistributionCache cache;

  std::vector<TokenSequence> corpus(double delta, const std::string& label) {
    const WatermarkConfig config = make_two_key_config("acceptance.cell.key", delta, kCellM);
    std::vector<TokenSequence> result;
    result.reserve(kCellCount);
    for (std::size_t i = 0; i < kCellCount; ++i) {
      const std::string tag = label + "." + std::to_string(i);
      RngStream key_rng("acceptance.cell", tag + ".keys");
      const KeySequence keys = generate_key_sequence(config, kCellN, key_rng);
      RngStream sample_rng("acceptance.cell", tag + ".sample");
      result.push_back(generate_watermarked(*oracle, identity_order(kCellN), config,
                                            partition, keys, sample_rng));
    }
    return result;
  }

  std::size_t hits(const std::vector<TokenSequence>& corpus, double f) {
    const WatermarkConfig config = make_two_key_config("acceptance.cell.key", 0.0, kCellM);
    std::size_t count = 0;
    for (const TokenSequence& tokens : corpus) {
      count += detect(tokens, config, partition, &cache).p_value <= f;
    }
    return count;
  }
};

Outcome criterion5() {
  const auto start = Clock::now();
  Pipeline pipe;
  std::vector<double> tprs;
  for (std::size_t d = 0; d < std::size(kDeltaGrid); ++d) {
    const auto corpus = pipe.corpus(kDeltaGrid[d], "c5.d" + std::to_string(d));
    tprs.push_back(static_cast<double>(pipe.hits(corpus, 1e-3)) / kCellCount);
  }
  bool monotone = true;
  for (std::size_t d = 1; d < tprs.size(); ++d) {
    monotone = monotone && tprs[d] >= tprs[d - 1];
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = monotone && tprs.back() >= kTprFloorAtTopDelta &&
             elapsed < kTrendBudgetSeconds;
  std::ostringstream detail;
  detail << "tpr@0.001 over delta {0.5,1,1.5,2,4} =";
  for (double t : tprs) detail << " " << t;
  detail << (monotone ? " (non-decreasing)" : " (NOT monotone)") << ", top >= "
         << kTprFloorAtTopDelta << "; " << fmt(elapsed) << "s (budget "
         << fmt(kTrendBudgetSeconds) << "s)";
  out.detail = detail.str();
  return out;
}

Outcome criterion6() {
  Pipeline pipe;

  // Smallest grid delta whose clean-corpus TPR reaches the 0.95 floor.
  std::vector<TokenSequence> corpus;
  double chosen_delta = 0.0;
  double clean_tpr = 0.0;
  for (std::size_t d = 0; d < std::size(kDeltaGrid); ++d) {
    corpus = pipe.corpus(kDeltaGrid[d], "c6.d" + std::to_string(d));
    clean_tpr = static_cast<double>(pipe.hits(corpus, 1e-3)) / kCellCount;
    if (clean_tpr >= kRobustnessBaseTpr) {
      chosen_delta = kDeltaGrid[d];
      break;
    }
  }
  if (chosen_delta == 0.0) {
    return {false, "no grid delta reached clean TPR >= " + fmt(kRobustnessBaseTpr)};
  }

  // Empirical FPR from unwatermarked generations of the same oracle.
  const auto null_corpus = pipe.corpus(0.0, "c6.null");
  const std::size_t null_hits = pipe.hits(null_corpus, 1e-3);
  const double empirical_fpr = static_cast<double>(null_hits) / kCellCount;

  // The same watermarked corpus attacked at each strength.
  const double epsilons[] = {0.0, 0.05, 0.1, 0.2, 0.3};
  std::vector<double> tprs;
  std::vector<double> test_p_values;
  // Null success probability for the significance test: the larger of the
  // empirical FPR and the theoretical threshold, so the test never gets
  // easier when the empirical estimate is zero.
  const double null_rate = std::max(empirical_fpr, 1e-3);
  for (std::size_t e = 0; e < std::size(epsilons); ++e) {
    std::size_t hit_count = 0;
    if (epsilons[e] == 0.0) {
      hit_count = pipe.hits(corpus, 1e-3);
    } else {
      std::vector<TokenSequence> attacked;
      attacked.reserve(corpus.size());
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        RngStream rng("acceptance.c6",
                      "attack.e" + std::to_string(e) + "." + std::to_string(i));
        attacked.push_back(random_token_attack(corpus[i], 20, epsilons[e], rng));
      }
      hit_count = pipe.hits(attacked, 1e-3);
    }
    tprs.push_back(static_cast<double>(hit_count) / kCellCount);
    test_p_values.push_back(binomial_upper_tail(kCellCount, hit_count, null_rate));
  }

  bool monotone = true;
  for (std::size_t e = 1; e < tprs.size(); ++e) {
    monotone = monotone && tprs[e] <= tprs[e - 1];
  }
  bool separated = true;
  for (double p : test_p_values) separated = separated && p < kBinomialAlpha;

  Outcome out;
  out.pass = monotone && separated;
  std::ostringstream detail;
  detail << "delta " << chosen_delta << ", tpr over eps {0,.05,.1,.2,.3} =";
  for (double t : tprs) detail << " " << t;
  detail << (monotone ? " (non-increasing)" : " (NOT monotone)")
         << ", empirical fpr " << empirical_fpr << ", max binomial p "
         << *std::max_element(test_p_values.begin(), test_p_values.end())
         << " (alpha " << kBinomialAlpha << ")";
  out.detail = detail.str();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: generation order does not matter. Identity, random
// permutation and mask-predict schedules all detect at saturating delta.

Outcome criterion7() {
  const std::size_t n = 200;
  const std::size_t runs = 100;
  const VocabPartition partition = build_partition("acceptance.c7.partition", 20, 2);
  const WatermarkConfig config = make_two_key_config("acceptance.c7.key", 20.0, 5);
  const auto oracle =
      make_oracle(OracleKind::kContextHash, 20, 0.5, "acceptance.c7.oracle");
  NullDistributionCache cache;
  std::size_t detected = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    RngStream key_rng("acceptance.c7", "keys." + std::to_string(i));
    const KeySequence keys = generate_key_sequence(config, n, key_rng);
    for (OrderKind kind : {OrderKind::kLeftToRight, OrderKind::kRandomPermutation,
                           OrderKind::kMaskPredictRounds}) {
      RngStream order_rng("acceptance.c7", "order." + order_kind_name(kind) + "." +
                                               std::to_string(i));
      const GenerationOrder order = make_order(kind, n, 4, order_rng);
      RngStream sample_rng("acceptance.c7", "sample." + order_kind_name(kind) + "." +
                                                std::to_string(i));
      const TokenSequence tokens = generate_watermarked(
          *oracle, order, config, partition, keys, sample_rng);
      detected += detect(tokens, config, partition, &cache).watermarked;
    }
  }
  Outcome out;
  out.pass = detected == 3 * runs;
  out.detail = std::to_string(detected) + "/" + std::to_string(3 * runs) +
               " detected across identity, permutation, mask-predict at delta=20";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8: key chain statistics and the saturated pattern count.

Outcome criterion8() {
  const std::size_t steps = 1000000;
  const WatermarkConfig config = make_two_key_config("acceptance.c8.key", 1.0, 3, 0.3);
  RngStream rng("acceptance.c8", "chain");
  const KeySequence keys = generate_key_sequence(config, steps, rng);
  double counts[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 1; i < keys.size(); ++i) {
    counts[keys[i - 1]][keys[i]] += 1.0;
  }
  double worst = 0.0;
  const double expected[2][2] = {{0.3, 0.7}, {0.7, 0.3}};
  for (int a = 0; a < 2; ++a) {
    const double row = counts[a][0] + counts[a][1];
    for (int b = 0; b < 2; ++b) {
      worst = std::max(worst, std::abs(counts[a][b] / row - expected[a][b]));
    }
  }

  bool exact_counts = true;
  const WatermarkConfig alternating =
      make_two_key_config("acceptance.c8.alt", 1.0, 3, 0.0);
  for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
           {12, 2}, {50, 3}, {100, 5}, {1000, 6}}) {
    WatermarkConfig c = alternating;
    c.m = m;
    RngStream chain_rng("acceptance.c8", "alt." + std::to_string(n) + "." +
                                             std::to_string(m));
    const KeySequence alt_keys = generate_key_sequence(c, n, chain_rng);
    exact_counts = exact_counts &&
                   count_patterns(alt_keys, c.pattern_set, m, c.l) == n - m + 1;
  }

  Outcome out;
  out.pass = worst <= kTransitionTolerance && exact_counts;
  out.detail = "transition freq err " + fmt(worst) + " (limit " +
               fmt(kTransitionTolerance) + ") over 1e6 steps; saturated count " +
               (exact_counts ? "== n-m+1 at all probes" : "MISMATCH");
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 9: single-sequence latency at n=2000, m=6, cold and warm cache.

Outcome criterion9() {
  const std::size_t n = 2000;
  const VocabPartition partition = build_partition("acceptance.c9.partition", 20, 2);
  const WatermarkConfig config = make_two_key_config("acceptance.c9.key", 0.0, 6);
  RngStream rng("acceptance.c9", "seq");
  TokenSequence tokens(n);
  for (std::size_t j = 0; j < n; ++j) {
    tokens[j] = static_cast<TokenId>(rng.uniform_int(20));
  }
  NullDistributionCache cache;
  const auto cold_start = Clock::now();
  const DetectionReport cold = detect(tokens, config, partition, &cache);
  const double cold_seconds = seconds_since(cold_start);
  const auto warm_start = Clock::now();
  const DetectionReport warm = detect(tokens, config, partition, &cache);
  const double warm_seconds = seconds_since(warm_start);
  Outcome out;
  out.pass = cold_seconds < kColdBudgetSeconds && warm_seconds < kWarmBudgetSeconds &&
             cold.p_value == warm.p_value;
  out.detail = "cold " + fmt(cold_seconds) + "s (limit " + fmt(kColdBudgetSeconds) +
               "s), warm " + fmt(warm_seconds) + "s (limit " +
               fmt(kWarmBudgetSeconds) + "s), p " + fmt(cold.p_value);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},
      {4, criterion4}, {5, criterion5}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    try {
      selected.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::cerr << "usage: acceptance [criterion numbers 1..9]\n";
      return 2;
    }
    if (!criteria.count(selected.back())) {
      std::cerr << "unknown criterion " << selected.back() << "\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (const auto& [id, fn] : criteria) selected.push_back(id);
  }

  bool all_pass = true;
  for (int id : selected) {
    Outcome outcome;
    try {
      outcome = criteria.at(id)();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    all_pass = all_pass && outcome.pass;
    std::cout << "criterion " << id << ": " << (outcome.pass ? "PASS" : "FAIL")
              << " — " << outcome.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
