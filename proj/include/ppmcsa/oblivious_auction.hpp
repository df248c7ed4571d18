#pragma once

// Auction circuits over garbled tuple arrays: VBG splitting and MMIN bidding,
// winner determination with flag vectors, and pricing. The gate list depends
// only on PublicParams; sensitive values enter as share buses.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ppmcsa/auction_core.hpp"
#include "ppmcsa/builders.hpp"
#include "ppmcsa/circuit.hpp"

namespace ppmcsa::oblivious {

using auction::Id;
using circuit::Bus;
using circuit::Circuit;
using circuit::Wire;

enum class Mode : std::uint8_t {
  Original = 0,  // every running sum rebuilt where it is used
  Improved = 1,  // prefix sums built once and reused
};

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& text);

struct PublicSeller {
  Id id = 0;
  std::uint32_t request_count = 1;
};

struct PublicGroup {
  Id group_id = 0;
  std::vector<Id> members;  // ascending
};

// Everything both parties know before the garbled phase.
struct PublicParams {
  unsigned bit_length = 16;
  std::uint32_t d_max = 10;
  Mode mode = Mode::Improved;
  std::vector<PublicSeller> sellers;  // ascending id
  std::vector<PublicGroup> groups;    // ascending group id

  std::size_t buyer_count() const;
  std::array<std::uint8_t, 32> hash() const;
};

// Sellers and groups as the auctioneer derives them from a scenario.
PublicParams public_params(const auction::Scenario& scenario, Mode mode);

// --- segment builders --------------------------------------------------------

struct BuyerBuses {
  Bus bid;    // B bits
  Bus count;  // bits_for(D) bits
};

struct VbgSplit {
  Bus min_bid;                      // b of the last record after the pass
  std::vector<Bus> vbg_bid;         // D entries, pi_width bits
  std::vector<Bus> vbg_size;        // D entries
  std::vector<Bus> positioned_count;  // d per record position after the pass
  std::vector<std::pair<std::size_t, std::size_t>> comparators;
  std::vector<Wire> swap_flags;
};

// Members in ascending id order. One bubble pass moves the minimum (b, larger id
// on ties) last, then n_k = #{non-last members with d >= k} and pi_k = b_min * n_k.
VbgSplit build_vbg_split(Circuit& c, const std::vector<BuyerBuses>& members, std::uint32_t d_max,
                     std::size_t pi_width);

struct SellerBuses {
  Bus request_value;
  std::uint32_t request_count = 1;  // public
};

struct VbgBuses {
  Bus bid;
  std::size_t group_rank = 0;  // position of the group in ascending id order
  std::uint32_t index = 1;     // k
};

struct WinnerResult {
  Bus winning_vbg_count;      // W
  Bus winning_seller_count;   // j at the last profitable trade
  Bus critical_value;         // phi
  std::vector<Wire> seller_won;  // per input seller position
  std::vector<Wire> vbg_won;     // per input VBG position
};

WinnerResult build_winner_determination(Circuit& c, const std::vector<SellerBuses>& sellers, const std::vector<VbgBuses>& vbgs,
                      std::size_t group_count, std::uint32_t d_max, unsigned bit_length, Mode mode);

struct GroupAllocation {
  Bus won_channels;          // D_t
  Bus min_bid;               // b_min when the group has winners, else 0
  std::vector<Bus> channels;  // h per member, ascending id; 0 for losers
};

GroupAllocation build_allocation(Circuit& c, const VbgSplit& group, const std::vector<Wire>& vbg_won,
                     std::uint32_t d_max);

// --- full circuit --------------------------------------------------------------

struct RevealPlan {
  std::vector<std::string> buses;  // in decode order
};

struct AuctionCircuit {
  PublicParams params;
  Circuit circuit;
  RevealPlan reveal;
  // Reconstructed sensitive values; never part of the reveal plan.
  std::vector<Bus> sensitive;
};

namespace names {
std::string seller_share(Id id, circuit::Party owner);
std::string bid_share(Id id, circuit::Party owner);
std::string count_share(Id id, circuit::Party owner);
inline const std::string kWinningVbgs = "W";
inline const std::string kWinningSellers = "winning_seller_count";
inline const std::string kCriticalValue = "phi";
std::string seller_won(Id id);
std::string group_channels(Id group);
std::string group_min_bid(Id group);
std::string buyer_channels(Id id);
}  // namespace names

AuctionCircuit assemble_full_circuit(const PublicParams& params);

// Values of every reveal bus, keyed by bus name.
using Revealed = std::map<std::string, std::uint64_t>;

auction::AuctionOutcome outcome_from_reveals(const PublicParams& params, const Revealed& revealed);

// Splits every sensitive value of `scenario` into shares (seeded) and assigns
// both parties' share buses; for clear evaluation of the assembled circuit.
circuit::InputAssignment share_assignment(const AuctionCircuit& ac, const auction::Scenario& scenario,
                                          std::uint64_t seed);

// Clear evaluation of the assembled circuit followed by outcome reconstruction.
auction::AuctionOutcome evaluate_clear(const AuctionCircuit& ac, const auction::Scenario& scenario,
                                       std::uint64_t seed = 1);

}  // namespace ppmcsa::oblivious
