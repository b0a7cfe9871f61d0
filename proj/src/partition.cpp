#include "patternmark/partition.hpp"

#include <numeric>
#include <utility>

#include "patternmark/digest.hpp"
#include "patternmark/errors.hpp"
#include "patternmark/rng.hpp"

namespace patternmark {

VocabPartition::VocabPartition(std::uint32_t vocab_size, std::uint32_t key_count,
                               std::vector<KeyIndex> assignment,
                               std::unordered_set<TokenId> excluded)
    : vocab_size_(vocab_size),
      key_count_(key_count),
      assignment_(std::move(assignment)),
      excluded_(std::move(excluded)) {
  if (key_count_ < 2) throw ConfigError("partition: need at least 2 keys");
  if (vocab_size_ < key_count_) {
    throw ConfigError("partition: vocabulary smaller than key count");
  }
  if (assignment_.size() != vocab_size_) {
    throw ConfigError("partition: assignment size does not match vocab size");
  }
  sizes_.assign(key_count_, 0);
  for (KeyIndex k : assignment_) {
    if (k >= key_count_) throw ConfigError("partition: key index out of range");
    ++sizes_[k];
  }
  for (TokenId t : excluded_) {
    if (t >= vocab_size_) {
      throw ConfigError("partition: excluded token out of range");
    }
  }
}

KeyIndex VocabPartition::key_of(TokenId token) const {
  if (token >= vocab_size_) {
    throw InputError("token id " + std::to_string(token) +
                     " outside vocabulary of size " + std::to_string(vocab_size_));
  }
  return assignment_[token];
}

std::uint32_t VocabPartition::part_size(KeyIndex key) const {
  if (key >= key_count_) throw InputError("key index out of range");
  return sizes_[key];
}

VocabPartition VocabPartition::with_exclusions(
    std::unordered_set<TokenId> excluded) const {
  return VocabPartition(vocab_size_, key_count_, assignment_, std::move(excluded));
}

std::string VocabPartition::digest() const {
  DigestWriter w("patternmark.partition.v1");
  w.u32(vocab_size_).u32(key_count_);
  for (KeyIndex k : assignment_) w.u32(k);
  return w.finish_hex();
}

VocabPartition build_partition(std::string_view secret_seed,
                               std::uint32_t vocab_size, std::uint32_t l) {
  if (l < 2) throw ConfigError("build_partition: l must be >= 2");
  if (vocab_size < l) {
    throw ConfigError("build_partition: vocab size must be >= l");
  }
  // Keyed permutation of [0, N); position p in the permutation is assigned
  // key p mod l, so part sizes differ by at most one.
  std::vector<TokenId> perm(vocab_size);
  std::iota(perm.begin(), perm.end(), TokenId{0});
  RngStream rng(secret_seed, "partition");
  for (std::uint32_t i = vocab_size - 1; i > 0; --i) {
    std::uint64_t j = rng.uniform_int(static_cast<std::uint64_t>(i) + 1);
    std::swap(perm[i], perm[j]);
  }
  std::vector<KeyIndex> assignment(vocab_size);
  for (std::uint32_t p = 0; p < vocab_size; ++p) {
    assignment[perm[p]] = static_cast<KeyIndex>(p % l);
  }
  return VocabPartition(vocab_size, l, std::move(assignment));
}

}  // namespace patternmark
