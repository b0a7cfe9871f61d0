#include "patternmark/bench.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "patternmark/detector.hpp"
#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"
#include "patternmark/keygen.hpp"
#include "patternmark/partition.hpp"
#include "patternmark/sampler.hpp"

namespace patternmark {

Scheme parse_scheme(const std::string& name) {
  if (name == "patternmark") return Scheme::kPatternMark;
  if (name == "greenlist") return Scheme::kGreenlist;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected patternmark or greenlist)");
}

std::string scheme_name(Scheme scheme) {
  return scheme == Scheme::kPatternMark ? "patternmark" : "greenlist";
}

std::size_t BenchConfig::cell_count() const {
  return schemes.size() * deltas.size() * ms.size() * a11s.size() *
         epsilons.size();
}

std::uint64_t BenchConfig::total_sequences() const {
  return static_cast<std::uint64_t>(cell_count()) *
         (static_cast<std::uint64_t>(count) + null_count);
}

void BenchConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("bench: vocab size must be >= 2");
  if (!(entropy_knob > 0.0)) throw ConfigError("bench: entropy knob must be > 0");
  if (n == 0) throw ConfigError("bench: n must be >= 1");
  if (count == 0) throw ConfigError("bench: count must be >= 1");
  if (rounds == 0) throw ConfigError("bench: rounds must be >= 1");
  if (schemes.empty() || deltas.empty() || ms.empty() || a11s.empty() ||
      epsilons.empty() || fprs.empty()) {
    throw ConfigError("bench: every sweep axis needs at least one value");
  }
  for (double d : deltas) {
    if (!(d >= 0.0)) throw ConfigError("bench: delta must be >= 0");
  }
  for (std::size_t m : ms) {
    if (m < 2 || m > n) throw ConfigError("bench: m must satisfy 2 <= m <= n");
  }
  for (double a : a11s) {
    if (!(a >= 0.0) || a > 1.0) throw ConfigError("bench: a11 must lie in [0, 1]");
  }
  for (double e : epsilons) {
    if (!(e >= 0.0) || e > 1.0) {
      throw ConfigError("bench: epsilon must lie in [0, 1]");
    }
  }
  for (double f : fprs) {
    if (!(f > 0.0) || f > 1.0) throw ConfigError("bench: fpr must lie in (0, 1]");
  }
  if (total_sequences() > sequence_budget) {
    std::ostringstream msg;
    msg << "bench: grid is infeasible: " << cell_count() << " cells x ("
        << count << " + " << null_count << ") sequences = " << total_sequences()
        << " generations, budget " << sequence_budget
        << "; shrink the sweep or raise the budget";
    throw ConfigError(msg.str());
  }
}

namespace {

std::string global_params_digest(const BenchConfig& config) {
  DigestWriter w("patternmark.bench.global.v1");
  w.str(config.secret_seed).str(oracle_kind_name(config.oracle));
  w.u32(config.vocab_size).f64(config.entropy_knob);
  w.str(order_kind_name(config.order)).u64(config.rounds);
  w.u64(config.n).u64(config.count).u64(config.null_count);
  w.u64(config.fprs.size());
  for (double f : config.fprs) w.f64(f);
  return w.finish_hex();
}

}  // namespace

std::string BenchCell::cell_key(const BenchConfig& config) const {
  DigestWriter w("patternmark.bench.cell.v1");
  w.str(global_params_digest(config));
  w.str(scheme_name(scheme)).f64(delta).u64(m).f64(a11).f64(epsilon);
  return w.finish_hex();
}

std::string bench_cell_json(const BenchConfig& config, const BenchCell& cell) {
  nlohmann::json record;
  record["cell_key"] = cell.cell_key(config);
  record["scheme"] = scheme_name(cell.scheme);
  record["delta"] = cell.delta;
  record["m"] = cell.m;
  record["a11"] = cell.a11;
  record["epsilon"] = cell.epsilon;
  record["n"] = config.n;
  record["count"] = config.count;
  record["null_count"] = config.null_count;
  record["oracle"] = oracle_kind_name(config.oracle);
  record["order"] = order_kind_name(config.order);
  record["entropy"] = config.entropy_knob;
  record["vocab_size"] = config.vocab_size;
  record["fprs"] = config.fprs;
  record["tpr"] = cell.tpr;
  record["empirical_fpr"] = cell.empirical_fpr;
  record["mean_nll"] = cell.mean_nll;
  record["null_mean_nll"] = cell.null_mean_nll;
  return record.dump();
}

BenchCell run_bench_cell(const BenchConfig& config, Scheme scheme, double delta,
                         std::size_t m, double a11, double epsilon) {
  BenchCell cell;
  cell.scheme = scheme;
  cell.delta = delta;
  cell.m = m;
  cell.a11 = a11;
  cell.epsilon = epsilon;
  cell.tpr.assign(config.fprs.size(), 0.0);
  cell.empirical_fpr.assign(config.fprs.size(), 0.0);

  const std::string key = cell.cell_key(config);
  const auto oracle = make_oracle(config.oracle, config.vocab_size,
                                  config.entropy_knob, config.secret_seed);
  const VocabPartition partition =
      build_partition(config.secret_seed, config.vocab_size, 2);
  NullDistributionCache& cache = NullDistributionCache::global();

  // One corpus pass: `watermarked` selects the promotion strength and which
  // p-value tally the sequence feeds.
  auto run_corpus = [&](bool watermarked, std::size_t corpus_size,
                        std::vector<double>& hit_fraction, double& nll_out) {
    const double strength = watermarked ? delta : 0.0;
    const WatermarkConfig wm_config =
        make_two_key_config(config.secret_seed, strength, m, a11);
    std::vector<std::uint64_t> hits(config.fprs.size(), 0);
    GenerationStats stats;
    const std::string corpus_tag = watermarked ? ".wm." : ".null.";
    for (std::size_t i = 0; i < corpus_size; ++i) {
      const std::string label = "bench." + key + corpus_tag + std::to_string(i);
      KeySequence keys;
      if (scheme == Scheme::kPatternMark) {
        RngStream keygen_rng(config.secret_seed, label + ".keygen");
        keys = generate_key_sequence(wm_config, config.n, keygen_rng);
      } else {
        keys.assign(config.n, 0);  // fixed green part
      }
      RngStream order_rng(config.secret_seed, label + ".order");
      const GenerationOrder order =
          make_order(config.order, config.n, config.rounds, order_rng);
      RngStream sample_rng(config.secret_seed, label + ".sample");
      TokenSequence tokens =
          generate_watermarked(*oracle, order, wm_config, partition, keys,
                               sample_rng, &stats);
      if (watermarked && epsilon > 0.0) {
        RngStream attack_rng(config.secret_seed, label + ".attack");
        tokens = random_token_attack(tokens, config.vocab_size, epsilon,
                                     attack_rng);
      }
      double p_value;
      if (scheme == Scheme::kPatternMark) {
        p_value = detect(tokens, wm_config, partition, &cache).p_value;
      } else {
        p_value = detect_greenlist_baseline(tokens, partition, 0,
                                            wm_config.fpr_threshold)
                      .p_value;
      }
      for (std::size_t j = 0; j < config.fprs.size(); ++j) {
        if (p_value <= config.fprs[j]) ++hits[j];
      }
    }
    for (std::size_t j = 0; j < config.fprs.size(); ++j) {
      hit_fraction[j] =
          static_cast<double>(hits[j]) / static_cast<double>(corpus_size);
    }
    nll_out = stats.mean_nll();
  };

  run_corpus(true, config.count, cell.tpr, cell.mean_nll);
  if (config.null_count > 0) {
    run_corpus(false, config.null_count, cell.empirical_fpr, cell.null_mean_nll);
  }
  return cell;
}

std::size_t run_bench(const BenchConfig& config, const std::string& results_path,
                      const std::function<void(std::size_t, std::size_t)>&
                          progress) {
  config.validate();

  // Cells already on disk are finished; an interrupted run resumes with
  // whatever keys it can still parse (a torn final line is skipped).
  std::unordered_set<std::string> done;
  {
    std::ifstream in(results_path);
    std::string line;
    while (std::getline(in, line)) {
      nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
      if (record.is_discarded() || !record.contains("cell_key")) continue;
      done.insert(record["cell_key"].get<std::string>());
    }
  }

  struct Pending {
    Scheme scheme;
    double delta;
    std::size_t m;
    double a11;
    double epsilon;
  };
  std::vector<Pending> pending;
  for (Scheme scheme : config.schemes) {
    for (double delta : config.deltas) {
      for (std::size_t m : config.ms) {
        for (double a11 : config.a11s) {
          for (double epsilon : config.epsilons) {
            BenchCell probe;
            probe.scheme = scheme;
            probe.delta = delta;
            probe.m = m;
            probe.a11 = a11;
            probe.epsilon = epsilon;
            if (done.count(probe.cell_key(config)) == 0) {
              pending.push_back({scheme, delta, m, a11, epsilon});
            }
          }
        }
      }
    }
  }
  if (pending.empty()) return 0;

  std::ofstream out(results_path, std::ios::app);
  if (!out) throw InputError("cannot open " + results_path + " for append");

  std::size_t workers = config.workers;
  if (workers == 0) {
    workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, pending.size());

  std::mutex writer_mutex;
  std::size_t next_cell = 0;
  std::size_t finished = 0;
  std::exception_ptr failure;

  auto worker = [&]() {
    for (;;) {
      Pending job;
      {
        std::scoped_lock lock(writer_mutex);
        if (failure || next_cell >= pending.size()) return;
        job = pending[next_cell++];
      }
      try {
        BenchCell cell = run_bench_cell(config, job.scheme, job.delta, job.m,
                                        job.a11, job.epsilon);
        std::scoped_lock lock(writer_mutex);
        out << bench_cell_json(config, cell) << "\n";
        out.flush();
        ++finished;
        if (progress) progress(finished, pending.size());
      } catch (...) {
        std::scoped_lock lock(writer_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return finished;
}

}  // namespace patternmark
