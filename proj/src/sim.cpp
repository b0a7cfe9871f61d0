#include "patternmark/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"

namespace patternmark {

namespace {

// Symmetric Dirichlet(alpha) draw. For small alpha the gamma variates
// underflow (the boost factor U^(1/alpha) vanishes), so that regime runs in
// log space and only exponentiates relative to the maximum.
std::vector<double> sample_dirichlet(double alpha, std::uint32_t size,
                                     RngStream& rng) {
  std::vector<double> out(size);
  if (alpha >= 0.1) {
    double sum = 0.0;
    for (double& g : out) {
      g = rng.gamma(alpha);
      sum += g;
    }
    if (sum > 0.0) {
      for (double& g : out) g /= sum;
      return out;
    }
    // Fall through to the log-space path on total underflow.
  }
  std::vector<double> log_g(size);
  for (double& lg : log_g) {
    double boost = rng.gamma(alpha + 1.0);
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    lg = std::log(boost) + std::log(u) / alpha;
  }
  const double peak = *std::max_element(log_g.begin(), log_g.end());
  double sum = 0.0;
  for (std::uint32_t i = 0; i < size; ++i) {
    out[i] = std::exp(log_g[i] - peak);
    sum += out[i];
  }
  for (double& g : out) g /= sum;
  return out;
}

class IidDirichletOracle final : public DistributionOracle {
 public:
  IidDirichletOracle(std::uint32_t vocab_size, double entropy_knob,
                     std::string seed)
      : vocab_size_(vocab_size),
        entropy_knob_(entropy_knob),
        seed_(std::move(seed)) {}

  std::uint32_t vocab_size() const override { return vocab_size_; }

  std::vector<double> conditional(std::size_t position,
                                  const TokenSequence&) const override {
    {
      std::shared_lock lock(mutex_);
      auto it = memo_.find(position);
      if (it != memo_.end()) return *it->second;
    }
    // Context-free by design: one distribution per position, derived from
    // a position-labeled stream, so every query agrees with the memo.
    RngStream rng(seed_, "oracle.iid." + std::to_string(position));
    auto dist = std::make_shared<std::vector<double>>(
        sample_dirichlet(entropy_knob_, vocab_size_, rng));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = memo_.emplace(position, std::move(dist));
    return *it->second;
  }

 private:
  std::uint32_t vocab_size_;
  double entropy_knob_;
  std::string seed_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<std::size_t,
                             std::shared_ptr<const std::vector<double>>>
      memo_;
};

class ContextHashOracle final : public DistributionOracle {
 public:
  ContextHashOracle(std::uint32_t vocab_size, double entropy_knob,
                    std::string seed)
      : vocab_size_(vocab_size),
        entropy_knob_(entropy_knob),
        seed_(std::move(seed)) {}

  std::uint32_t vocab_size() const override { return vocab_size_; }

  std::vector<double> conditional(std::size_t position,
                                  const TokenSequence& context) const override {
    // The filled neighborhood feeds the stream label, so changing any
    // generated neighbor genuinely changes this conditional.
    DigestWriter w("patternmark.oracle.ctx.v1");
    w.u64(position);
    for (std::size_t i = 0; i < context.size(); ++i) {
      if (context[i] == kGapToken || i == position) continue;
      w.u64(i).u32(context[i]);
    }
    RngStream rng(seed_, "oracle.ctx." + w.finish_hex());
    return sample_dirichlet(entropy_knob_, vocab_size_, rng);
  }

 private:
  std::uint32_t vocab_size_;
  double entropy_knob_;
  std::string seed_;
};

}  // namespace

OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "iid") return OracleKind::kIidDirichlet;
  if (name == "ctx") return OracleKind::kContextHash;
  throw ConfigError("unknown oracle kind '" + name + "' (expected iid or ctx)");
}

std::string oracle_kind_name(OracleKind kind) {
  return kind == OracleKind::kIidDirichlet ? "iid" : "ctx";
}

std::unique_ptr<DistributionOracle> make_oracle(OracleKind kind,
                                                std::uint32_t vocab_size,
                                                double entropy_knob,
                                                std::string_view oracle_seed) {
  if (vocab_size < 2) throw ConfigError("oracle: vocab size must be >= 2");
  if (!(entropy_knob > 0.0) || !std::isfinite(entropy_knob)) {
    throw ConfigError("oracle: entropy knob must be finite and > 0");
  }
  std::string seed(oracle_seed);
  if (kind == OracleKind::kIidDirichlet) {
    return std::make_unique<IidDirichletOracle>(vocab_size, entropy_knob,
                                                std::move(seed));
  }
  return std::make_unique<ContextHashOracle>(vocab_size, entropy_knob,
                                             std::move(seed));
}

OrderKind parse_order_kind(const std::string& name) {
  if (name == "ltr") return OrderKind::kLeftToRight;
  if (name == "perm") return OrderKind::kRandomPermutation;
  if (name == "maskpredict") return OrderKind::kMaskPredictRounds;
  throw ConfigError("unknown order kind '" + name +
                    "' (expected ltr, perm or maskpredict)");
}

std::string order_kind_name(OrderKind kind) {
  switch (kind) {
    case OrderKind::kLeftToRight:
      return "ltr";
    case OrderKind::kRandomPermutation:
      return "perm";
    case OrderKind::kMaskPredictRounds:
      return "maskpredict";
  }
  throw ConfigError("unknown order kind");
}

namespace {

// count distinct positions drawn without replacement from [0, n).
std::vector<std::size_t> draw_positions(std::size_t n, std::size_t count,
                                        RngStream& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

GenerationOrder make_order(OrderKind kind, std::size_t n, std::size_t rounds,
                           RngStream& rng) {
  if (n == 0) throw ConfigError("order: n must be >= 1");
  GenerationOrder order;
  order.length = n;
  switch (kind) {
    case OrderKind::kLeftToRight:
      return identity_order(n);
    case OrderKind::kRandomPermutation: {
      order.visits = draw_positions(n, n, rng);
      return order;
    }
    case OrderKind::kMaskPredictRounds: {
      if (rounds == 0) throw ConfigError("order: rounds must be >= 1");
      // Round 1 fills everything left to right; later rounds resample a
      // shrinking random subset, ascending within the round, mirroring the
      // iterative refinement schedule n * (R - r + 1) / R.
      order.visits.resize(n);
      std::iota(order.visits.begin(), order.visits.end(), std::size_t{0});
      for (std::size_t r = 2; r <= rounds; ++r) {
        std::size_t share = n * (rounds - r + 1) / rounds;
        if (share == 0) continue;
        std::vector<std::size_t> revisit = draw_positions(n, share, rng);
        std::sort(revisit.begin(), revisit.end());
        order.visits.insert(order.visits.end(), revisit.begin(), revisit.end());
      }
      return order;
    }
  }
  throw ConfigError("unknown order kind");
}

TokenSequence random_token_attack(const TokenSequence& tokens,
                                  std::uint32_t vocab_size, double epsilon,
                                  RngStream& rng) {
  if (!(epsilon >= 0.0) || epsilon > 1.0) {
    throw ConfigError("attack: epsilon must lie in [0, 1]");
  }
  if (vocab_size < 2) throw ConfigError("attack: vocab size must be >= 2");
  const std::size_t n = tokens.size();
  const std::size_t hits = static_cast<std::size_t>(
      std::floor(epsilon * static_cast<double>(n) + 0.5));
  TokenSequence out = tokens;
  if (hits == 0) return out;
  for (std::size_t position : draw_positions(n, hits, rng)) {
    const TokenId original = out[position];
    // Uniform over the vocabulary minus the original token.
    std::uint64_t r = rng.uniform_int(vocab_size - 1);
    if (original < vocab_size && r >= original) ++r;
    out[position] = static_cast<TokenId>(r);
  }
  return out;
}

}  // namespace patternmark
