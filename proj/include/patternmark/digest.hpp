#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patternmark {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(std::span<const std::uint8_t> bytes);

// Incremental SHA-256 over a canonical byte encoding. Integers are written
// little-endian at fixed width; strings and byte blobs are length-prefixed,
// so concatenated fields cannot alias each other.
class DigestWriter {
 public:
  DigestWriter();
  explicit DigestWriter(std::string_view domain_tag);
  DigestWriter(const DigestWriter&) = delete;
  DigestWriter& operator=(const DigestWriter&) = delete;
  DigestWriter(DigestWriter&&) noexcept;
  DigestWriter& operator=(DigestWriter&&) noexcept;
  ~DigestWriter();

  DigestWriter& u8(std::uint8_t v);
  DigestWriter& u32(std::uint32_t v);
  DigestWriter& u64(std::uint64_t v);
  DigestWriter& f64(double v);  // exact bit pattern
  DigestWriter& str(std::string_view s);
  DigestWriter& bytes(std::span<const std::uint8_t> data);

  Digest finish();
  std::string finish_hex();

 private:
  void* ctx_ = nullptr;
  void update(const void* data, std::size_t len);
};

Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

}  // namespace patternmark
