#include "patternmark/rng.hpp"

#include <cmath>
#include <cstdint>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"

namespace patternmark {

namespace {

std::mt19937_64 make_engine(std::string_view secret_seed,
                            std::string_view label) {
  Digest d = DigestWriter("patternmark.rng.v1").str(secret_seed).str(label).finish();
  std::uint32_t words[8];
  for (int i = 0; i < 8; ++i) {
    words[i] = static_cast<std::uint32_t>(d[4 * i]) |
               static_cast<std::uint32_t>(d[4 * i + 1]) << 8 |
               static_cast<std::uint32_t>(d[4 * i + 2]) << 16 |
               static_cast<std::uint32_t>(d[4 * i + 3]) << 24;
  }
  std::seed_seq seq(words, words + 8);
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::string_view secret_seed, std::string_view label)
    : engine_(make_engine(secret_seed, label)) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // Top 53 bits, the standard max-resolution double in [0, 1).
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw ContractViolation("uniform_int: bound must be >= 1");
  if ((bound & (bound - 1)) == 0) return next_u64() & (bound - 1);
  // Mask rejection: unbiased and cheap, a couple of draws on average.
  std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(bound - 1);
  for (;;) {
    std::uint64_t x = next_u64() & mask;
    if (x < bound) return x;
  }
}

double RngStream::normal() {
  // Box-Muller, one variate per call; the sine twin is dropped so the
  // stream position stays a simple function of the call count.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 == 0.0) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

double RngStream::gamma(double alpha) {
  if (!(alpha > 0.0)) throw ContractViolation("gamma: alpha must be > 0");
  // Marsaglia-Tsang squeeze; the alpha < 1 case boosts via a power of a
  // uniform (Gamma(a) = Gamma(a+1) * U^(1/a)).
  if (alpha < 1.0) {
    double u = uniform();
    while (u == 0.0) u = uniform();
    return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform();
    while (u == 0.0) u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t sample_index(std::span<const double> weights, RngStream& rng) {
  if (weights.empty()) throw ContractViolation("sample_index: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ContractViolation("sample_index: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw ContractViolation("sample_index: all weights zero");
  double target = rng.uniform() * total;
  double cum = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = i;
    cum += weights[i];
    if (target < cum && weights[i] > 0.0) return i;
  }
  // Rounding pushed the target past the accumulated total; return the last
  // index that can legally be drawn.
  return last_positive;
}

}  // namespace patternmark
