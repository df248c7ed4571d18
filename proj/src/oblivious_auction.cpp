#include "ppmcsa/oblivious_auction.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ppmcsa/crypto.hpp"
#include "ppmcsa/submission.hpp"

namespace ppmcsa::oblivious {

using circuit::add;
using circuit::bits_for;
using circuit::ceil_log2;
using circuit::gate_by;
using circuit::KeySpec;
using circuit::Order;
using circuit::Party;
using circuit::Record;
using circuit::resize;

const char* to_string(Mode mode) { return mode == Mode::Original ? "original" : "improved"; }

Mode mode_from_string(const std::string& text) {
  if (text == "original") return Mode::Original;
  if (text == "improved") return Mode::Improved;
  throw std::invalid_argument("unknown implementation mode '" + text + "'");
}

std::size_t PublicParams::buyer_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

std::array<std::uint8_t, 32> PublicParams::hash() const {
  crypto::Hasher h;
  h.update_u64(bit_length).update_u64(d_max).update_u64(static_cast<std::uint64_t>(mode));
  h.update_u64(sellers.size());
  for (const auto& s : sellers) h.update_u64(s.id).update_u64(s.request_count);
  h.update_u64(groups.size());
  for (const auto& g : groups) {
    h.update_u64(g.group_id).update_u64(g.members.size());
    for (Id m : g.members) h.update_u64(m);
  }
  return h.finish();
}

PublicParams public_params(const auction::Scenario& scenario, Mode mode) {
  scenario.validate();
  PublicParams p;
  p.bit_length = scenario.bit_length;
  p.d_max = scenario.d_max;
  p.mode = mode;
  for (const auto& s : scenario.sellers) p.sellers.push_back({s.id, s.request_count});
  std::sort(p.sellers.begin(), p.sellers.end(), [](auto& a, auto& b) { return a.id < b.id; });
  const auto graph = auction::build_conflict_graph(scenario.buyers, scenario.radius_m);
  for (const auto& g : auction::form_groups(graph)) p.groups.push_back({g.group_id, g.members});
  return p;
}

// --- VBG splitting and bidding ------------------------------------------------

VbgSplit build_vbg_split(Circuit& c, const std::vector<BuyerBuses>& members, std::uint32_t d_max,
                     std::size_t pi_width) {
  if (members.empty()) throw circuit::CircuitError("group without members");
  const std::size_t n = members.size();
  const std::size_t rank_width = bits_for(n - 1);
  const std::size_t count_width = bits_for(d_max);
  const std::size_t size_width = bits_for(n - 1);

  enum Field { kBid = 0, kRank = 1, kCount = 2 };
  std::vector<Record> records;
  records.reserve(n);
  for (std::size_t q = 0; q < n; ++q)
    records.push_back({members[q].bid, c.constant(q, rank_width), resize(members[q].count, count_width)});

  // Swap neighbours when the former is smaller, so the minimum ends up last.
  // Equal bids compare on the complemented rank: the larger id counts as smaller.
  const KeySpec key = {{kBid, false}, {kRank, true}};
  VbgSplit out;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    out.comparators.emplace_back(j, j + 1);
    out.swap_flags.push_back(circuit::compare_exchange(c, records, j, j + 1, key, Order::Descending));
  }
  out.min_bid = records[n - 1][kBid];
  for (const auto& r : records) out.positioned_count.push_back(r[kCount]);

  for (std::uint32_t k = 1; k <= d_max; ++k) {
    Bus size = c.constant(0, size_width);
    const Bus threshold = c.constant(k, bits_for(k));
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const Wire gamma = circuit::ge(c, records[j][kCount], threshold);
      size = add(c, size, Bus{{gamma}}, size_width);
    }
    out.vbg_size.push_back(size);
    out.vbg_bid.push_back(resize(circuit::build_mul(c, out.min_bid, size), pi_width));
  }
  return out;
}

// --- winner determination ----------------------------------------------------

WinnerResult build_winner_determination(Circuit& c, const std::vector<SellerBuses>& sellers, const std::vector<VbgBuses>& vbgs,
                      std::size_t group_count, std::uint32_t d_max, unsigned bit_length, Mode mode) {
  const std::size_t m = sellers.size();
  const std::size_t k_total = vbgs.size();
  if (m == 0 || k_total == 0) throw circuit::CircuitError("winner determination needs sellers and VBGs");

  std::uint32_t max_c = 1;
  std::uint64_t total_channels = 0;
  for (const auto& s : sellers) {
    max_c = std::max(max_c, s.request_count);
    total_channels += s.request_count;
  }
  const std::size_t count_width = bits_for(max_c);
  const std::size_t count_sum_width = count_width + ceil_log2(m);
  const std::size_t pi_width = vbgs.front().bid.width();
  const std::size_t pi_sum_width = pi_width + ceil_log2(k_total);
  const std::size_t index_width = bits_for(m - 1);
  const std::size_t trades = std::min<std::uint64_t>(total_channels, k_total);

  // Sellers ascending by (s, id); ids enter as ranks since the list is in id order.
  enum SellerField { kS = 0, kSellerRank = 1, kC = 2 };
  std::vector<Record> seller_records;
  for (std::size_t j = 0; j < m; ++j)
    seller_records.push_back({sellers[j].request_value, c.constant(j, bits_for(m - 1)),
                              c.constant(sellers[j].request_count, count_width)});
  auto sorted_sellers = circuit::build_sort_network(c, std::move(seller_records),
                                                    {{kS, false}, {kSellerRank, false}}, Order::Ascending);

  // VBGs descending by pi, then ascending group id, then ascending k.
  enum VbgField { kPi = 0, kGroup = 1, kIndex = 2 };
  std::vector<Record> vbg_records;
  for (const auto& v : vbgs)
    vbg_records.push_back({v.bid, c.constant(v.group_rank, bits_for(group_count - 1)),
                           c.constant(v.index - 1, bits_for(d_max - 1))});
  auto sorted_vbgs = circuit::build_sort_network(c, std::move(vbg_records),
                                                 {{kPi, false}, {kGroup, true}, {kIndex, true}},
                                                 Order::Descending);

  std::vector<Bus> s_sorted, c_sorted, pi_sorted;
  for (const auto& r : sorted_sellers.records) {
    s_sorted.push_back(r[kS]);
    c_sorted.push_back(r[kC]);
  }
  for (const auto& r : sorted_vbgs.records) pi_sorted.push_back(r[kPi]);

  // Cached running sums (improved mode only).
  std::vector<Bus> c_prefix(m);  // c_prefix[j] = c_1 + ... + c_j, j >= 1
  std::vector<Bus> pi_prefix(trades + 1);
  if (mode == Mode::Improved) {
    for (std::size_t j = 1; j < m; ++j)
      c_prefix[j] = j == 1 ? resize(c_sorted[0], count_sum_width)
                           : add(c, c_prefix[j - 1], c_sorted[j - 1], count_sum_width);
    for (std::size_t i = 1; i <= trades; ++i)
      pi_prefix[i] = i == 1 ? resize(pi_sorted[0], pi_sum_width)
                            : add(c, pi_prefix[i - 1], pi_sorted[i - 1], pi_sum_width);
  }
  const auto channels_through = [&](std::size_t j) {
    return mode == Mode::Improved ? c_prefix[j] : circuit::sum_range(c, c_sorted, j, count_sum_width);
  };

  Bus phi = c.constant(0, bit_length);
  Bus won_vbgs = c.constant(0, count_sum_width);
  Bus won_sellers = c.constant(0, index_width);
  Bus prev_phi, prev_w, prev_j;
  Wire prev_omega = Circuit::kZero;

  for (std::size_t i = 1; i <= trades; ++i) {
    const Bus trade = c.constant(i, bits_for(i));
    // lambda[j] = [c_1 + ... + c_j < i]; lambda[0] = 1 and lambda[M] = 0 bracket the pattern.
    std::vector<Wire> lambda(m + 1, Circuit::kZero);
    lambda[0] = Circuit::kOne;
    for (std::size_t j = m - 1; j >= 1; --j) lambda[j] = circuit::lt(c, channels_through(j), trade);

    Bus j_i = c.constant(0, index_width);
    Bus phi_i = c.constant(0, bit_length);
    Bus w_i = c.constant(0, count_sum_width);
    for (std::size_t j = m; j-- > 0;) {
      const Wire delta = c.xor_gate(lambda[j], lambda[j + 1]);
      if (j > 0) j_i = add(c, j_i, gate_by(c, delta, c.constant(j, index_width)), index_width);
      phi_i = add(c, phi_i, gate_by(c, delta, s_sorted[j]), bit_length);
      if (j > 0) w_i = add(c, w_i, gate_by(c, delta, channels_through(j)), count_sum_width);
    }

    const Bus bids = mode == Mode::Improved ? pi_prefix[i] : circuit::sum_range(c, pi_sorted, i, pi_sum_width);
    const Bus ask = circuit::mul_const(c, phi_i, i, bit_length + bits_for(i));
    const Wire omega = circuit::ge(c, bids, ask);

    if (i > 1) {
      const Wire edge = c.xor_gate(prev_omega, omega);
      phi = add(c, phi, gate_by(c, edge, prev_phi), bit_length);
      won_vbgs = add(c, won_vbgs, gate_by(c, edge, prev_w), count_sum_width);
      won_sellers = add(c, won_sellers, gate_by(c, edge, prev_j), index_width);
    }
    prev_phi = phi_i;
    prev_w = w_i;
    prev_j = j_i;
    prev_omega = omega;
  }
  phi = add(c, phi, gate_by(c, prev_omega, prev_phi), bit_length);
  won_vbgs = add(c, won_vbgs, gate_by(c, prev_omega, prev_w), count_sum_width);
  won_sellers = add(c, won_sellers, gate_by(c, prev_omega, prev_j), index_width);

  WinnerResult out;
  out.winning_vbg_count = won_vbgs;
  out.winning_seller_count = won_sellers;
  out.critical_value = phi;

  // Winner flags by sorted position, then moved back to submission order so
  // that decoding them says nothing about the ranking.
  std::vector<Bus> seller_flags;
  for (std::size_t p = 1; p <= m; ++p)
    seller_flags.push_back(Bus{{circuit::ge(c, won_sellers, c.constant(p, bits_for(p)))}});
  seller_flags = circuit::unsort(c, sorted_sellers.comparators, sorted_sellers.swap_flags, std::move(seller_flags));
  for (const auto& f : seller_flags) out.seller_won.push_back(f[0]);

  std::vector<Bus> vbg_flags;
  for (std::size_t p = 1; p <= k_total; ++p)
    vbg_flags.push_back(Bus{{circuit::ge(c, won_vbgs, c.constant(p, bits_for(p)))}});
  vbg_flags = circuit::unsort(c, sorted_vbgs.comparators, sorted_vbgs.swap_flags, std::move(vbg_flags));
  for (const auto& f : vbg_flags) out.vbg_won.push_back(f[0]);
  return out;
}

// --- channel allocation ------------------------------------------------------

GroupAllocation build_allocation(Circuit& c, const VbgSplit& group, const std::vector<Wire>& vbg_won,
                     std::uint32_t d_max) {
  const std::size_t width = bits_for(d_max);
  const std::size_t n = group.positioned_count.size();
  GroupAllocation out;
  out.won_channels = c.constant(0, width);
  for (Wire w : vbg_won) out.won_channels = add(c, out.won_channels, Bus{{w}}, width);

  const Wire has_winners = circuit::any_bit(c, out.won_channels);
  out.min_bid = n >= 2 ? gate_by(c, has_winners, group.min_bid) : c.constant(0, group.min_bid.width());

  // h = min(d, D_t) for every position but the last (critical) one.
  std::vector<Bus> h;
  for (std::size_t q = 0; q + 1 < n; ++q) h.push_back(circuit::build_min(c, group.positioned_count[q], out.won_channels));
  h.push_back(c.constant(0, width));
  out.channels = circuit::unsort(c, group.comparators, group.swap_flags, std::move(h));
  return out;
}

// --- full circuit -------------------------------------------------------------

namespace names {
namespace {
const char* tag(Party p) { return p == Party::Evaluator ? "A" : "B"; }
}  // namespace
std::string seller_share(Id id, Party owner) { return "seller/" + std::to_string(id) + "/s/" + tag(owner); }
std::string bid_share(Id id, Party owner) { return "buyer/" + std::to_string(id) + "/b/" + tag(owner); }
std::string count_share(Id id, Party owner) { return "buyer/" + std::to_string(id) + "/d/" + tag(owner); }
std::string seller_won(Id id) { return "seller/" + std::to_string(id) + "/won"; }
std::string group_channels(Id group) { return "group/" + std::to_string(group) + "/channels"; }
std::string group_min_bid(Id group) { return "group/" + std::to_string(group) + "/min_bid"; }
std::string buyer_channels(Id id) { return "buyer/" + std::to_string(id) + "/channels"; }
}  // namespace names

AuctionCircuit assemble_full_circuit(const PublicParams& params) {
  if (params.sellers.empty() || params.groups.empty())
    throw circuit::CircuitError("public parameters need sellers and groups");
  if (params.d_max < 1) throw circuit::CircuitError("D must be at least 1");
  AuctionCircuit ac;
  ac.params = params;
  Circuit& c = ac.circuit;
  const unsigned b = params.bit_length;
  const std::size_t count_width = bits_for(params.d_max);

  // Share inputs: the auctioneer (evaluator) holds the A halves, the agent the B halves.
  std::vector<SellerBuses> sellers;
  for (const auto& s : params.sellers) {
    const Bus a = c.add_input(names::seller_share(s.id, Party::Evaluator), Party::Evaluator, b);
    const Bus g = c.add_input(names::seller_share(s.id, Party::Garbler), Party::Garbler, b);
    sellers.push_back({submission::reconstruct_in_circuit(c, a, g), s.request_count});
    ac.sensitive.push_back(sellers.back().request_value);
  }

  std::size_t max_group = 1;
  for (const auto& g : params.groups) max_group = std::max(max_group, g.members.size());
  const std::size_t pi_width = b + bits_for(max_group - 1);

  std::vector<VbgSplit> splits;
  std::vector<VbgBuses> vbgs;
  for (std::size_t t = 0; t < params.groups.size(); ++t) {
    std::vector<BuyerBuses> members;
    for (Id id : params.groups[t].members) {
      const Bus ba = c.add_input(names::bid_share(id, Party::Evaluator), Party::Evaluator, b);
      const Bus bb = c.add_input(names::bid_share(id, Party::Garbler), Party::Garbler, b);
      const Bus da = c.add_input(names::count_share(id, Party::Evaluator), Party::Evaluator, b);
      const Bus db = c.add_input(names::count_share(id, Party::Garbler), Party::Garbler, b);
      // d < 2^count_width, so the low bits of the share sum are exact.
      members.push_back({submission::reconstruct_in_circuit(c, ba, bb),
                         circuit::build_adder(c, resize(da, count_width), resize(db, count_width))});
      ac.sensitive.push_back(members.back().bid);
      ac.sensitive.push_back(members.back().count);
    }
    splits.push_back(build_vbg_split(c, members, params.d_max, pi_width));
    for (std::uint32_t k = 1; k <= params.d_max; ++k) vbgs.push_back({splits.back().vbg_bid[k - 1], t, k});
  }

  const WinnerResult winners =
      build_winner_determination(c, sellers, vbgs, params.groups.size(), params.d_max, b, params.mode);

  const auto reveal = [&](const std::string& name, const Bus& bus) {
    c.add_output(name, bus);
    ac.reveal.buses.push_back(name);
  };
  reveal(names::kWinningVbgs, winners.winning_vbg_count);
  reveal(names::kWinningSellers, winners.winning_seller_count);
  reveal(names::kCriticalValue, winners.critical_value);
  for (std::size_t j = 0; j < params.sellers.size(); ++j)
    reveal(names::seller_won(params.sellers[j].id), Bus{{winners.seller_won[j]}});

  for (std::size_t t = 0; t < params.groups.size(); ++t) {
    const std::vector<Wire> won(winners.vbg_won.begin() + t * params.d_max,
                                winners.vbg_won.begin() + (t + 1) * params.d_max);
    const GroupAllocation g = build_allocation(c, splits[t], won, params.d_max);
    const Id gid = params.groups[t].group_id;
    reveal(names::group_channels(gid), g.won_channels);
    reveal(names::group_min_bid(gid), g.min_bid);
    for (std::size_t q = 0; q < g.channels.size(); ++q)
      reveal(names::buyer_channels(params.groups[t].members[q]), g.channels[q]);
  }
  return ac;
}

auction::AuctionOutcome outcome_from_reveals(const PublicParams& params, const Revealed& revealed) {
  const auto get = [&](const std::string& name) {
    const auto it = revealed.find(name);
    if (it == revealed.end()) throw std::runtime_error("missing revealed value '" + name + "'");
    return it->second;
  };
  auction::AuctionOutcome out;
  out.critical_value = get(names::kCriticalValue);
  out.winning_vbg_count = get(names::kWinningVbgs);
  for (const auto& s : params.sellers)
    if (get(names::seller_won(s.id)))
      out.winning_sellers.push_back({s.id, s.request_count, s.request_count * out.critical_value});
  for (const auto& g : params.groups) {
    const auction::Money min_bid = get(names::group_min_bid(g.group_id));
    for (Id id : g.members) {
      const auto h = static_cast<std::uint32_t>(get(names::buyer_channels(id)));
      if (h > 0) out.winning_buyers.push_back({id, h, h * min_bid});
    }
  }
  std::sort(out.winning_buyers.begin(), out.winning_buyers.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

circuit::InputAssignment share_assignment(const AuctionCircuit& ac, const auction::Scenario& scenario,
                                          std::uint64_t seed) {
  crypto::Prg rng(seed, "ppmcsa.shares");
  const unsigned b = ac.params.bit_length;
  circuit::InputAssignment in;
  const auto assign = [&](const std::string& a_name, const std::string& b_name, std::uint64_t v) {
    const auto p = submission::split(v, b, rng);
    in[a_name] = p.share_a;
    in[b_name] = p.share_b;
  };
  for (const auto& s : scenario.sellers)
    assign(names::seller_share(s.id, Party::Evaluator), names::seller_share(s.id, Party::Garbler),
           s.request_value);
  for (const auto& buyer : scenario.buyers) {
    assign(names::bid_share(buyer.id, Party::Evaluator), names::bid_share(buyer.id, Party::Garbler),
           buyer.bid_value);
    assign(names::count_share(buyer.id, Party::Evaluator), names::count_share(buyer.id, Party::Garbler),
           std::clamp<std::uint32_t>(buyer.bid_count, 1, ac.params.d_max));
  }
  return in;
}

auction::AuctionOutcome evaluate_clear(const AuctionCircuit& ac, const auction::Scenario& scenario,
                                       std::uint64_t seed) {
  const auto values = ac.circuit.evaluate(share_assignment(ac, scenario, seed));
  Revealed revealed;
  for (const auto& name : ac.reveal.buses) revealed[name] = Circuit::read(values, ac.circuit.output(name).bus);
  return outcome_from_reveals(ac.params, revealed);
}

}  // namespace ppmcsa::oblivious
