#pragma once

// Clear-text multi-channel double spectrum auction with spectrum reuse:
// conflict-graph grouping, MMIN virtual-buyer-group bidding, McAfee-style
// winner determination and pricing. This is the reference the oblivious
// circuits are checked against.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ppmcsa::auction {

using Money = std::uint64_t;
using Id = std::uint32_t;

struct SellerTuple {
  Id id = 0;
  Money request_value = 0;       // s: minimum per-channel price
  std::uint32_t request_count = 1;  // c
  bool winner = false;
};

struct BuyerTuple {
  Id id = 0;
  double x = 0.0;
  double y = 0.0;
  Money bid_value = 0;          // b: maximum per-channel price
  std::uint32_t bid_count = 1;  // d
  bool winner = false;
};

struct GroupTuple {
  Id group_id = 0;
  std::optional<Money> min_bid;  // unset until bidding
  std::vector<Id> members;       // ascending buyer ids
  std::size_t size() const { return members.size(); }
};

struct VbgTuple {
  Id group_id = 0;
  std::uint32_t index = 1;  // k, 1-based
  Money bid = 0;            // pi
  std::uint32_t member_count = 0;
  bool winner = false;
  bool operator==(const VbgTuple&) const = default;
};

struct SellerAward {
  Id id = 0;
  std::uint32_t channels = 0;
  Money payment = 0;
  bool operator==(const SellerAward&) const = default;
};

struct BuyerAward {
  Id id = 0;
  std::uint32_t channels = 0;
  Money price = 0;
  bool operator==(const BuyerAward&) const = default;
};

struct AuctionOutcome {
  std::vector<SellerAward> winning_sellers;  // ascending id
  std::vector<BuyerAward> winning_buyers;    // ascending id
  Money critical_value = 0;                  // phi
  std::uint64_t winning_vbg_count = 0;       // W
  bool operator==(const AuctionOutcome&) const = default;
};

class AuctionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Buyers are re-indexed in ascending id order; adjacency refers to those indices.
struct ConflictGraph {
  std::vector<Id> ids;
  std::vector<std::vector<std::size_t>> adjacency;

  bool has_edge(Id a, Id b) const;
  std::size_t edge_count() const;
};

ConflictGraph build_conflict_graph(const std::vector<BuyerTuple>& buyers, double radius);

// Greedy sequential colouring in ascending id order. Group ids are 1..T.
std::vector<GroupTuple> form_groups(const ConflictGraph& graph);

struct GroupSplit {
  GroupTuple group;                 // min_bid filled in
  std::vector<BuyerTuple> members;  // ascending id
  Id critical_id = 0;
  std::vector<VbgTuple> vbgs;       // exactly D entries, k = 1..D
};

// MMIN: the minimum bidder (larger id on ties) is critical and removed; the
// k-th VBG holds the remaining members with d >= k and bids min_bid * size.
GroupSplit mmin_split_and_bid(const GroupTuple& group, const std::vector<BuyerTuple>& members,
                              std::uint32_t d_max);

struct WinnerDetermination {
  std::vector<SellerTuple> sorted_sellers;  // ascending (s, id)
  std::vector<VbgTuple> sorted_vbgs;        // descending pi, then group id, then k
  std::size_t last_profitable_trade = 0;    // k_l, 0 when no trade is profitable
  std::size_t critical_seller = 0;          // j(k_l), 1-based; 0 when none
  Money critical_value = 0;                 // phi
  std::uint64_t winning_vbg_count = 0;      // W
  std::vector<SellerTuple> winning_sellers;
  std::vector<VbgTuple> winning_vbgs;
};

WinnerDetermination determine_winners(const std::vector<SellerTuple>& sellers,
                                       const std::vector<VbgTuple>& vbgs);

AuctionOutcome price(const WinnerDetermination& determination,
                     const std::vector<GroupSplit>& splits);

struct Scenario {
  unsigned bit_length = 16;
  std::uint32_t d_max = 10;
  double radius_m = 400.0;
  double area_m = 2000.0;
  std::vector<SellerTuple> sellers;
  std::vector<BuyerTuple> buyers;

  // Throws AuctionError on out-of-range values or duplicate ids.
  void validate() const;
};

// Everything the clear run computed, for cross-checks against the circuit.
struct ClearTrace {
  ConflictGraph graph;
  std::vector<GroupSplit> splits;
  WinnerDetermination determination;
  AuctionOutcome outcome;
};

ClearTrace trace_clear_auction(const Scenario& scenario);
AuctionOutcome run_clear_auction(const Scenario& scenario);

}  // namespace ppmcsa::auction
