#pragma once

// Bidder-side sealing: every sensitive value is split into two additive
// B-bit shares and each share is sealed to one party's public key
// (X25519 sealed box: ephemeral KEM + XSalsa20-Poly1305).
// Request counts and locations travel in the clear.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ppmcsa/auction_core.hpp"
#include "ppmcsa/circuit.hpp"
#include "ppmcsa/crypto.hpp"

namespace ppmcsa::submission {

using auction::Id;

struct SharePair {
  std::uint64_t share_a = 0;  // auctioneer
  std::uint64_t share_b = 0;  // agent
  unsigned bits = 16;
  std::uint64_t reconstruct() const;
};

SharePair split(std::uint64_t value, unsigned bits, crypto::Prg& rng);

// (a + b) mod 2^B inside the circuit.
circuit::Bus reconstruct_in_circuit(circuit::Circuit& c, const circuit::Bus& share_a,
                                    const circuit::Bus& share_b);

struct KeyPair {
  std::array<std::uint8_t, 32> public_key{};
  std::array<std::uint8_t, 32> secret_key{};

  static KeyPair generate();
  static KeyPair from_seed(std::uint64_t seed, std::string_view label);
};

using PublicKey = std::array<std::uint8_t, 32>;

enum class Role : std::uint8_t { Auctioneer = 0, Agent = 1 };

enum class Field : std::uint8_t { RequestValue = 1, BidValue = 2, BidCount = 3 };

using Envelope = std::vector<std::uint8_t>;
// 4-byte id + 1-byte field tag + 4-byte share, plus sealed-box overhead.
inline constexpr std::size_t kEnvelopeBytes = 9 + 48;

class EnvelopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Envelope seal_share(std::uint64_t share, Id bidder, Field field, const PublicKey& recipient);
// Throws EnvelopeError when the envelope is not addressed to `keys`, was
// tampered with, or carries a different (bidder, field) binding.
std::uint64_t open_share(const Envelope& envelope, Id bidder, Field field, const KeyPair& keys);

struct SealedSeller {
  Id id = 0;
  std::uint32_t request_count = 1;
  Envelope s_auctioneer;
  Envelope s_agent;
};

struct SealedBuyer {
  Id id = 0;
  double x = 0.0;
  double y = 0.0;
  Envelope b_auctioneer;
  Envelope b_agent;
  Envelope d_auctioneer;
  Envelope d_agent;
};

struct SealedSubmissions {
  unsigned bit_length = 16;
  std::vector<SealedSeller> sellers;
  std::vector<SealedBuyer> buyers;
};

SealedSeller seal_seller(const auction::SellerTuple& seller, unsigned bits, const PublicKey& pk_auctioneer,
                         const PublicKey& pk_agent, crypto::Prg& rng);
// The bid count is clamped to [1, d_max] before splitting.
SealedBuyer seal_buyer(const auction::BuyerTuple& buyer, unsigned bits, std::uint32_t d_max,
                       const PublicKey& pk_auctioneer, const PublicKey& pk_agent, crypto::Prg& rng);

SealedSubmissions seal_scenario(const auction::Scenario& scenario, const PublicKey& pk_auctioneer,
                                const PublicKey& pk_agent, std::uint64_t seed);

// Clear shares held by one role.
std::uint64_t open_seller(const SealedSeller& s, Role role, const KeyPair& keys);
std::pair<std::uint64_t, std::uint64_t> open_buyer(const SealedBuyer& b, Role role, const KeyPair& keys);

nlohmann::ordered_json to_json(const SealedSubmissions& subs);
SealedSubmissions submissions_from_json(const nlohmann::json& doc);

}  // namespace ppmcsa::submission
