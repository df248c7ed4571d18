#include "ppmcsa/submission.hpp"

#include <sodium.h>

#include <algorithm>

#include "ppmcsa/builders.hpp"

namespace ppmcsa::submission {

namespace {

std::uint64_t mask(unsigned bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

std::array<std::uint8_t, 9> payload(std::uint64_t share, Id bidder, Field field) {
  std::array<std::uint8_t, 9> p{};
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(bidder >> (8 * i));
  p[4] = static_cast<std::uint8_t>(field);
  for (int i = 0; i < 4; ++i) p[5 + i] = static_cast<std::uint8_t>(share >> (8 * i));
  return p;
}

}  // namespace

std::uint64_t SharePair::reconstruct() const { return (share_a + share_b) & mask(bits); }

SharePair split(std::uint64_t value, unsigned bits, crypto::Prg& rng) {
  if (bits == 0 || bits > 32) throw std::invalid_argument("share width must be in [1, 32]");
  if (value > mask(bits)) throw std::invalid_argument("value does not fit the share width");
  SharePair p;
  p.bits = bits;
  p.share_a = rng.next_u64() & mask(bits);
  p.share_b = (value - p.share_a) & mask(bits);
  return p;
}

circuit::Bus reconstruct_in_circuit(circuit::Circuit& c, const circuit::Bus& share_a,
                                    const circuit::Bus& share_b) {
  return circuit::build_adder(c, share_a, share_b);
}

KeyPair KeyPair::generate() {
  crypto::ensure_sodium();
  KeyPair k;
  crypto_box_keypair(k.public_key.data(), k.secret_key.data());
  return k;
}

KeyPair KeyPair::from_seed(std::uint64_t seed, std::string_view label) {
  crypto::Prg prg(seed, label);
  std::array<std::uint8_t, crypto_box_SEEDBYTES> s{};
  prg.fill(s);
  KeyPair k;
  crypto_box_seed_keypair(k.public_key.data(), k.secret_key.data(), s.data());
  return k;
}

Envelope seal_share(std::uint64_t share, Id bidder, Field field, const PublicKey& recipient) {
  crypto::ensure_sodium();
  const auto p = payload(share, bidder, field);
  Envelope out(p.size() + crypto_box_SEALBYTES);
  if (crypto_box_seal(out.data(), p.data(), p.size(), recipient.data()) != 0)
    throw EnvelopeError("sealing failed");
  return out;
}

std::uint64_t open_share(const Envelope& envelope, Id bidder, Field field, const KeyPair& keys) {
  crypto::ensure_sodium();
  if (envelope.size() != kEnvelopeBytes) throw EnvelopeError("envelope has wrong length");
  std::array<std::uint8_t, 9> p{};
  if (crypto_box_seal_open(p.data(), envelope.data(), envelope.size(), keys.public_key.data(),
                           keys.secret_key.data()) != 0)
    throw EnvelopeError("envelope authentication failed for bidder " + std::to_string(bidder));
  Id got_id = 0;
  for (int i = 0; i < 4; ++i) got_id |= Id{p[i]} << (8 * i);
  if (got_id != bidder || p[4] != static_cast<std::uint8_t>(field))
    throw EnvelopeError("envelope bound to a different bidder or field");
  std::uint64_t share = 0;
  for (int i = 0; i < 4; ++i) share |= std::uint64_t{p[5 + i]} << (8 * i);
  return share;
}

SealedSeller seal_seller(const auction::SellerTuple& seller, unsigned bits, const PublicKey& pk_auctioneer,
                         const PublicKey& pk_agent, crypto::Prg& rng) {
  const SharePair s = split(seller.request_value, bits, rng);
  return {seller.id, seller.request_count,
          seal_share(s.share_a, seller.id, Field::RequestValue, pk_auctioneer),
          seal_share(s.share_b, seller.id, Field::RequestValue, pk_agent)};
}

SealedBuyer seal_buyer(const auction::BuyerTuple& buyer, unsigned bits, std::uint32_t d_max,
                       const PublicKey& pk_auctioneer, const PublicKey& pk_agent, crypto::Prg& rng) {
  const std::uint32_t d = std::clamp<std::uint32_t>(buyer.bid_count, 1, std::max<std::uint32_t>(d_max, 1));
  const SharePair b = split(buyer.bid_value, bits, rng);
  const SharePair dd = split(d, bits, rng);
  return {buyer.id,
          buyer.x,
          buyer.y,
          seal_share(b.share_a, buyer.id, Field::BidValue, pk_auctioneer),
          seal_share(b.share_b, buyer.id, Field::BidValue, pk_agent),
          seal_share(dd.share_a, buyer.id, Field::BidCount, pk_auctioneer),
          seal_share(dd.share_b, buyer.id, Field::BidCount, pk_agent)};
}

SealedSubmissions seal_scenario(const auction::Scenario& scenario, const PublicKey& pk_auctioneer,
                                const PublicKey& pk_agent, std::uint64_t seed) {
  crypto::Prg rng(seed, "ppmcsa.bidders");
  SealedSubmissions subs;
  subs.bit_length = scenario.bit_length;
  for (const auto& s : scenario.sellers)
    subs.sellers.push_back(seal_seller(s, scenario.bit_length, pk_auctioneer, pk_agent, rng));
  for (const auto& b : scenario.buyers)
    subs.buyers.push_back(seal_buyer(b, scenario.bit_length, scenario.d_max, pk_auctioneer, pk_agent, rng));
  return subs;
}

std::uint64_t open_seller(const SealedSeller& s, Role role, const KeyPair& keys) {
  return open_share(role == Role::Auctioneer ? s.s_auctioneer : s.s_agent, s.id, Field::RequestValue, keys);
}

std::pair<std::uint64_t, std::uint64_t> open_buyer(const SealedBuyer& b, Role role, const KeyPair& keys) {
  const bool a = role == Role::Auctioneer;
  return {open_share(a ? b.b_auctioneer : b.b_agent, b.id, Field::BidValue, keys),
          open_share(a ? b.d_auctioneer : b.d_agent, b.id, Field::BidCount, keys)};
}

nlohmann::ordered_json to_json(const SealedSubmissions& subs) {
  using crypto::to_base64;
  nlohmann::ordered_json doc;
  doc["bit_length"] = subs.bit_length;
  doc["sellers"] = nlohmann::ordered_json::array();
  for (const auto& s : subs.sellers)
    doc["sellers"].push_back({{"id", s.id},
                              {"c", s.request_count},
                              {"s_auctioneer", to_base64(s.s_auctioneer)},
                              {"s_agent", to_base64(s.s_agent)}});
  doc["buyers"] = nlohmann::ordered_json::array();
  for (const auto& b : subs.buyers)
    doc["buyers"].push_back({{"id", b.id},
                             {"x", b.x},
                             {"y", b.y},
                             {"b_auctioneer", to_base64(b.b_auctioneer)},
                             {"b_agent", to_base64(b.b_agent)},
                             {"d_auctioneer", to_base64(b.d_auctioneer)},
                             {"d_agent", to_base64(b.d_agent)}});
  return doc;
}

SealedSubmissions submissions_from_json(const nlohmann::json& doc) {
  using crypto::from_base64;
  SealedSubmissions subs;
  try {
    subs.bit_length = doc.at("bit_length").get<unsigned>();
    for (const auto& s : doc.at("sellers"))
      subs.sellers.push_back({s.at("id").get<Id>(), s.at("c").get<std::uint32_t>(),
                              from_base64(s.at("s_auctioneer").get<std::string>()),
                              from_base64(s.at("s_agent").get<std::string>())});
    for (const auto& b : doc.at("buyers"))
      subs.buyers.push_back({b.at("id").get<Id>(), b.at("x").get<double>(), b.at("y").get<double>(),
                             from_base64(b.at("b_auctioneer").get<std::string>()),
                             from_base64(b.at("b_agent").get<std::string>()),
                             from_base64(b.at("d_auctioneer").get<std::string>()),
                             from_base64(b.at("d_agent").get<std::string>())});
  } catch (const nlohmann::json::exception& e) {
    throw EnvelopeError(std::string("malformed submission document: ") + e.what());
  }
  return subs;
}

}  // namespace ppmcsa::submission
