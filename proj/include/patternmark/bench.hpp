#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "patternmark/sim.hpp"
#include "patternmark/types.hpp"

namespace patternmark {

enum class Scheme {
  kPatternMark,  // Markov key sequence + pattern count test
  kGreenlist,    // fixed single green part + binomial test
};

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

// One generate -> (attack) -> detect grid. The grid is the cross product
// schemes x deltas x ms x a11s x epsilons; each cell runs `count`
// watermarked sequences plus `null_count` delta=0 sequences from the same
// oracle and reports TPR at every threshold in `fprs` alongside the
// empirical false positive rate on the null corpus.
struct BenchConfig {
  std::string secret_seed = "bench";
  OracleKind oracle = OracleKind::kIidDirichlet;
  std::uint32_t vocab_size = 20;
  double entropy_knob = 0.5;
  OrderKind order = OrderKind::kLeftToRight;
  std::size_t rounds = 4;  // mask-predict refinement rounds

  std::size_t n = 400;
  std::size_t count = 500;       // watermarked sequences per cell
  std::size_t null_count = 500;  // unwatermarked sequences per cell

  std::vector<Scheme> schemes = {Scheme::kPatternMark, Scheme::kGreenlist};
  std::vector<double> deltas = {0.5, 0.75, 1.0, 1.25, 1.5};
  std::vector<std::size_t> ms = {5};
  std::vector<double> a11s = {0.0};
  std::vector<double> epsilons = {0.0};
  std::vector<double> fprs = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};

  std::size_t workers = 0;  // 0 = hardware concurrency

  // Refusal guard: cells * (count + null_count) sequences must not exceed
  // this budget, otherwise run() throws ConfigError with a sizing estimate.
  std::uint64_t sequence_budget = 2'000'000;

  std::size_t cell_count() const;
  std::uint64_t total_sequences() const;
  void validate() const;
};

// One grid cell's parameters and measured outcome.
struct BenchCell {
  Scheme scheme = Scheme::kPatternMark;
  double delta = 0.0;
  std::size_t m = 0;
  double a11 = 0.0;
  double epsilon = 0.0;

  std::vector<double> tpr;            // parallel to config.fprs
  std::vector<double> empirical_fpr;  // parallel to config.fprs
  double mean_nll = 0.0;              // quality proxy, watermarked corpus
  double null_mean_nll = 0.0;

  // Identifies the cell across runs: digest of (global params, cell
  // params). Matching keys in an existing results file are skipped.
  std::string cell_key(const BenchConfig& config) const;
};

// Serialized one-per-line into the results file.
std::string bench_cell_json(const BenchConfig& config, const BenchCell& cell);

// Appends missing cells to `results_path` (JSON lines). Cells whose key
// already appears in the file are skipped, so an interrupted run resumes
// where it stopped. `progress`, when set, is called after each finished
// cell with (done, total). Returns the number of cells computed this call.
std::size_t run_bench(const BenchConfig& config, const std::string& results_path,
                      const std::function<void(std::size_t, std::size_t)>&
                          progress = nullptr);

// Computes one cell synchronously (exposed for tests).
BenchCell run_bench_cell(const BenchConfig& config, Scheme scheme, double delta,
                         std::size_t m, double a11, double epsilon);

}  // namespace patternmark
