#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "patternmark/types.hpp"

namespace patternmark {

// Deterministic map token id -> key index partitioning the vocabulary into
// l parts whose sizes differ by at most one. Immutable after construction;
// safe to share read-only across workers.
//
// Tokens may additionally be flagged excluded (pad/eos/mask and similar).
// Excluded tokens keep their assignment but are never promoted during
// sampling and are treated as gaps during detection.
class VocabPartition {
 public:
  VocabPartition() = default;
  VocabPartition(std::uint32_t vocab_size, std::uint32_t key_count,
                 std::vector<KeyIndex> assignment,
                 std::unordered_set<TokenId> excluded = {});

  std::uint32_t vocab_size() const { return vocab_size_; }
  std::uint32_t key_count() const { return key_count_; }

  // Throws InputError if token is out of range.
  KeyIndex key_of(TokenId token) const;

  bool is_excluded(TokenId token) const {
    return !excluded_.empty() && excluded_.count(token) > 0;
  }

  std::uint32_t part_size(KeyIndex key) const;

  const std::vector<KeyIndex>& assignment() const { return assignment_; }
  const std::unordered_set<TokenId>& excluded() const { return excluded_; }

  VocabPartition with_exclusions(std::unordered_set<TokenId> excluded) const;

  // Content digest over (vocab_size, key_count, assignment).
  std::string digest() const;

  bool operator==(const VocabPartition& other) const {
    return vocab_size_ == other.vocab_size_ && key_count_ == other.key_count_ &&
           assignment_ == other.assignment_;
  }

 private:
  std::uint32_t vocab_size_ = 0;
  std::uint32_t key_count_ = 0;
  std::vector<KeyIndex> assignment_;   // size vocab_size, values < key_count
  std::vector<std::uint32_t> sizes_;   // tokens per key
  std::unordered_set<TokenId> excluded_;
};

// Balanced deterministic split: a keyed pseudo-random permutation of
// [0, vocab_size) is derived from the secret seed and position p of the
// permutation is assigned key index p mod l. Requires vocab_size >= l >= 2.
VocabPartition build_partition(std::string_view secret_seed,
                               std::uint32_t vocab_size, std::uint32_t l);

}  // namespace patternmark
