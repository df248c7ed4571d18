#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ppmcsa::crypto {

// 128-bit string used for wire labels and OT payloads.
struct Block {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  Block operator^(const Block& o) const { return {lo ^ o.lo, hi ^ o.hi}; }
  Block& operator^=(const Block& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  bool operator==(const Block&) const = default;

  // Point-and-permute colour bit.
  bool lsb() const { return (lo & 1u) != 0; }

  std::array<std::uint8_t, 16> to_bytes() const;
  static Block from_bytes(std::span<const std::uint8_t> bytes);
};

inline constexpr std::size_t kBlockBytes = 16;

// Calls sodium_init() once; every entry point that touches libsodium goes through here.
void ensure_sodium();

// Deterministic stream of pseudorandom bytes (ChaCha20 keyed from a seed).
class Prg {
 public:
  explicit Prg(std::uint64_t seed, std::string_view domain = "ppmcsa.prg");
  // Fresh key from the OS generator.
  static Prg from_os();

  void fill(std::span<std::uint8_t> out);
  Block next_block();
  std::uint64_t next_u64();

 private:
  Prg() = default;
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t nonce_ = 0;
  std::array<std::uint8_t, 1024> buf_{};
  std::size_t pos_ = 1024;
};

// BLAKE2b-256 over a byte string.
std::array<std::uint8_t, 32> digest(std::span<const std::uint8_t> data);

// Incremental BLAKE2b-256.
class Hasher {
 public:
  Hasher();
  Hasher& update(std::span<const std::uint8_t> data);
  Hasher& update_u64(std::uint64_t v);
  std::array<std::uint8_t, 32> finish();

 private:
  alignas(64) std::array<std::uint8_t, 384> state_{};
};

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string to_base64(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_base64(const std::string& text);

}  // namespace ppmcsa::crypto
