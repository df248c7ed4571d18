#include "ppmcsa/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

namespace ppmcsa::crypto {

static_assert(sizeof(crypto_generichash_state) <= 384);

std::array<std::uint8_t, 16> Block::to_bytes() const {
  std::array<std::uint8_t, 16> out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<std::uint8_t>(lo >> (8 * i));
    out[8 + i] = static_cast<std::uint8_t>(hi >> (8 * i));
  }
  return out;
}

Block Block::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBlockBytes) throw std::invalid_argument("block needs 16 bytes");
  Block b;
  for (int i = 0; i < 8; ++i) {
    b.lo |= std::uint64_t{bytes[i]} << (8 * i);
    b.hi |= std::uint64_t{bytes[8 + i]} << (8 * i);
  }
  return b;
}

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialisation failed");
}

Prg::Prg(std::uint64_t seed, std::string_view domain) {
  ensure_sodium();
  Hasher h;
  h.update({reinterpret_cast<const std::uint8_t*>(domain.data()), domain.size()});
  h.update_u64(seed);
  key_ = h.finish();
}

Prg Prg::from_os() {
  ensure_sodium();
  Prg p;
  randombytes_buf(p.key_.data(), p.key_.size());
  return p;
}

void Prg::refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_NONCEBYTES> nonce{};
  for (std::size_t i = 0; i < nonce.size(); ++i) nonce[i] = static_cast<std::uint8_t>(nonce_ >> (8 * i));
  ++nonce_;
  crypto_stream_chacha20(buf_.data(), buf_.size(), nonce.data(), key_.data());
  pos_ = 0;
}

void Prg::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

Block Prg::next_block() {
  std::array<std::uint8_t, 16> raw{};
  fill(raw);
  return Block::from_bytes(raw);
}

std::uint64_t Prg::next_u64() { return next_block().lo; }

std::array<std::uint8_t, 32> digest(std::span<const std::uint8_t> data) {
  return Hasher{}.update(data).finish();
}

Hasher::Hasher() {
  ensure_sodium();
  crypto_generichash_init(reinterpret_cast<crypto_generichash_state*>(state_.data()), nullptr, 0, 32);
}

Hasher& Hasher::update(std::span<const std::uint8_t> data) {
  crypto_generichash_update(reinterpret_cast<crypto_generichash_state*>(state_.data()), data.data(),
                            data.size());
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t v) {
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return update(le);
}

std::array<std::uint8_t, 32> Hasher::finish() {
  std::array<std::uint8_t, 32> out{};
  crypto_generichash_final(reinterpret_cast<crypto_generichash_state*>(state_.data()), out.data(),
                           out.size());
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

std::string to_base64(std::span<const std::uint8_t> bytes) {
  ensure_sodium();
  std::string out(sodium_base64_ENCODED_LEN(bytes.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
  sodium_bin2base64(out.data(), out.size(), bytes.data(), bytes.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.pop_back();
  return out;
}

std::vector<std::uint8_t> from_base64(const std::string& text) {
  ensure_sodium();
  std::vector<std::uint8_t> out(text.size());
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, nullptr,
                        sodium_base64_VARIANT_ORIGINAL) != 0) {
    throw std::invalid_argument("malformed base64");
  }
  out.resize(len);
  return out;
}

}  // namespace ppmcsa::crypto
