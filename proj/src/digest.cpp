#include "patternmark/digest.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace patternmark {

namespace {

EVP_MD_CTX* new_sha256_ctx() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 context initialization failed");
  }
  return ctx;
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

DigestWriter::DigestWriter() : ctx_(new_sha256_ctx()) {}

DigestWriter::DigestWriter(std::string_view domain_tag) : DigestWriter() {
  str(domain_tag);
}

DigestWriter::DigestWriter(DigestWriter&& other) noexcept : ctx_(other.ctx_) {
  other.ctx_ = nullptr;
}

DigestWriter& DigestWriter::operator=(DigestWriter&& other) noexcept {
  if (this != &other) {
    if (ctx_ != nullptr) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
    ctx_ = other.ctx_;
    other.ctx_ = nullptr;
  }
  return *this;
}

DigestWriter::~DigestWriter() {
  if (ctx_ != nullptr) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void DigestWriter::update(const void* data, std::size_t len) {
  if (ctx_ == nullptr) throw std::logic_error("DigestWriter used after finish");
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, len) != 1) {
    throw std::runtime_error("sha256 update failed");
  }
}

DigestWriter& DigestWriter::u8(std::uint8_t v) {
  update(&v, 1);
  return *this;
}

DigestWriter& DigestWriter::u32(std::uint32_t v) {
  std::uint8_t buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
  update(buf, sizeof buf);
  return *this;
}

DigestWriter& DigestWriter::u64(std::uint64_t v) {
  std::uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
  update(buf, sizeof buf);
  return *this;
}

DigestWriter& DigestWriter::f64(double v) {
  return u64(std::bit_cast<std::uint64_t>(v));
}

DigestWriter& DigestWriter::str(std::string_view s) {
  u64(s.size());
  update(s.data(), s.size());
  return *this;
}

DigestWriter& DigestWriter::bytes(std::span<const std::uint8_t> data) {
  u64(data.size());
  update(data.data(), data.size());
  return *this;
}

Digest DigestWriter::finish() {
  if (ctx_ == nullptr) throw std::logic_error("DigestWriter used after finish");
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) != 1 ||
      len != out.size()) {
    throw std::runtime_error("sha256 finalization failed");
  }
  EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
  ctx_ = nullptr;
  return out;
}

std::string DigestWriter::finish_hex() {
  Digest d = finish();
  return to_hex(d);
}

Digest sha256(std::string_view data) {
  EVP_MD_CTX* ctx = new_sha256_ctx();
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size()) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  return out;
}

std::string sha256_hex(std::string_view data) {
  Digest d = sha256(data);
  return to_hex(d);
}

}  // namespace patternmark
