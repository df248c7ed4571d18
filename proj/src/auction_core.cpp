#include "ppmcsa/auction_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

namespace ppmcsa::auction {

bool ConflictGraph::has_edge(Id a, Id b) const {
  const auto ia = std::lower_bound(ids.begin(), ids.end(), a);
  const auto ib = std::lower_bound(ids.begin(), ids.end(), b);
  if (ia == ids.end() || *ia != a || ib == ids.end() || *ib != b) return false;
  const auto& adj = adjacency[static_cast<std::size_t>(ia - ids.begin())];
  return std::find(adj.begin(), adj.end(), static_cast<std::size_t>(ib - ids.begin())) != adj.end();
}

std::size_t ConflictGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency) twice += adj.size();
  return twice / 2;
}

ConflictGraph build_conflict_graph(const std::vector<BuyerTuple>& buyers, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw AuctionError("radius must be positive");
  std::vector<const BuyerTuple*> order;
  order.reserve(buyers.size());
  for (const auto& b : buyers) {
    if (!std::isfinite(b.x) || !std::isfinite(b.y))
      throw AuctionError("buyer " + std::to_string(b.id) + " has a non-finite location");
    order.push_back(&b);
  }
  std::sort(order.begin(), order.end(), [](auto* l, auto* r) { return l->id < r->id; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i - 1]->id == order[i]->id)
      throw AuctionError("duplicate buyer id " + std::to_string(order[i]->id));

  ConflictGraph g;
  g.ids.reserve(order.size());
  for (auto* b : order) g.ids.push_back(b->id);
  g.adjacency.assign(order.size(), {});
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const double dx = order[i]->x - order[j]->x;
      const double dy = order[i]->y - order[j]->y;
      if (dx * dx + dy * dy <= r2) {
        g.adjacency[i].push_back(j);
        g.adjacency[j].push_back(i);
      }
    }
  }
  return g;
}

std::vector<GroupTuple> form_groups(const ConflictGraph& graph) {
  const std::size_t n = graph.ids.size();
  std::vector<std::size_t> colour(n, SIZE_MAX);
  std::size_t colours = 0;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<bool> taken(colours + 1, false);
    for (std::size_t u : graph.adjacency[v])
      if (colour[u] != SIZE_MAX) taken[colour[u]] = true;
    std::size_t c = 0;
    while (taken[c]) ++c;
    colour[v] = c;
    colours = std::max(colours, c + 1);
  }
  std::vector<GroupTuple> groups(colours);
  for (std::size_t c = 0; c < colours; ++c) groups[c].group_id = static_cast<Id>(c + 1);
  for (std::size_t v = 0; v < n; ++v) groups[colour[v]].members.push_back(graph.ids[v]);
  return groups;
}

GroupSplit mmin_split_and_bid(const GroupTuple& group, const std::vector<BuyerTuple>& members,
                              std::uint32_t d_max) {
  if (members.empty()) throw AuctionError("group has no members");
  if (d_max < 1) throw AuctionError("D must be at least 1");
  GroupSplit split;
  split.group = group;
  split.members = members;
  std::sort(split.members.begin(), split.members.end(),
            [](const BuyerTuple& a, const BuyerTuple& b) { return a.id < b.id; });

  const auto critical = std::min_element(
      split.members.begin(), split.members.end(), [](const BuyerTuple& a, const BuyerTuple& b) {
        if (a.bid_value != b.bid_value) return a.bid_value < b.bid_value;
        return a.id > b.id;
      });
  split.critical_id = critical->id;
  const Money min_bid = critical->bid_value;
  split.group.min_bid = min_bid;

  split.vbgs.reserve(d_max);
  for (std::uint32_t k = 1; k <= d_max; ++k) {
    std::uint32_t n = 0;
    for (const auto& m : split.members)
      if (m.id != split.critical_id && m.bid_count >= k) ++n;
    split.vbgs.push_back(VbgTuple{group.group_id, k, min_bid * n, n, false});
  }
  return split;
}

WinnerDetermination determine_winners(const std::vector<SellerTuple>& sellers,
                                       const std::vector<VbgTuple>& vbgs) {
  if (sellers.empty() || vbgs.empty()) throw AuctionError("need at least one seller and one VBG");
  WinnerDetermination out;
  out.sorted_sellers = sellers;
  std::sort(out.sorted_sellers.begin(), out.sorted_sellers.end(),
            [](const SellerTuple& a, const SellerTuple& b) {
              if (a.request_value != b.request_value) return a.request_value < b.request_value;
              return a.id < b.id;
            });
  out.sorted_vbgs = vbgs;
  std::sort(out.sorted_vbgs.begin(), out.sorted_vbgs.end(), [](const VbgTuple& a, const VbgTuple& b) {
    if (a.bid != b.bid) return a.bid > b.bid;
    if (a.group_id != b.group_id) return a.group_id < b.group_id;
    return a.index < b.index;
  });

  const std::size_t m = out.sorted_sellers.size();
  std::uint64_t total_channels = 0;
  for (const auto& s : out.sorted_sellers) total_channels += s.request_count;
  const std::size_t q = std::min<std::uint64_t>(total_channels, out.sorted_vbgs.size());

  // j(i) = 1 + max{h in [0, M-1] : c_1 + ... + c_h < i}
  const auto seller_of_trade = [&](std::size_t i) {
    std::size_t best = 0;
    std::uint64_t prefix = 0;
    for (std::size_t h = 0; h < m; ++h) {
      if (h > 0) prefix += out.sorted_sellers[h - 1].request_count;
      if (prefix < i) best = h;
    }
    return best + 1;
  };

  Money bid_prefix = 0;
  for (std::size_t i = 1; i <= q; ++i) {
    bid_prefix += out.sorted_vbgs[i - 1].bid;
    const std::size_t j = seller_of_trade(i);
    if (bid_prefix >= static_cast<Money>(i) * out.sorted_sellers[j - 1].request_value) {
      out.last_profitable_trade = i;
      out.critical_seller = j;
    }
  }

  if (out.last_profitable_trade == 0) return out;

  out.critical_value = out.sorted_sellers[out.critical_seller - 1].request_value;
  for (std::size_t t = 0; t + 1 < out.critical_seller; ++t) {
    out.sorted_sellers[t].winner = true;
    out.winning_sellers.push_back(out.sorted_sellers[t]);
    out.winning_vbg_count += out.sorted_sellers[t].request_count;
  }
  for (std::size_t k = 0; k < out.winning_vbg_count; ++k) {
    out.sorted_vbgs[k].winner = true;
    out.winning_vbgs.push_back(out.sorted_vbgs[k]);
  }
  return out;
}

AuctionOutcome price(const WinnerDetermination& determination,
                     const std::vector<GroupSplit>& splits) {
  AuctionOutcome outcome;
  outcome.critical_value = determination.critical_value;
  outcome.winning_vbg_count = determination.winning_vbg_count;

  for (const auto& s : determination.winning_sellers)
    outcome.winning_sellers.push_back(
        {s.id, s.request_count, static_cast<Money>(s.request_count) * determination.critical_value});
  std::sort(outcome.winning_sellers.begin(), outcome.winning_sellers.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });

  std::map<Id, std::uint32_t> won_per_group;
  for (const auto& v : determination.winning_vbgs) ++won_per_group[v.group_id];

  for (const auto& split : splits) {
    const auto it = won_per_group.find(split.group.group_id);
    if (it == won_per_group.end()) continue;
    const std::uint32_t won = it->second;
    const Money min_bid = split.group.min_bid.value_or(0);
    for (const auto& m : split.members) {
      if (m.id == split.critical_id) continue;
      const std::uint32_t h = std::min(m.bid_count, won);
      outcome.winning_buyers.push_back({m.id, h, static_cast<Money>(h) * min_bid});
    }
  }
  std::sort(outcome.winning_buyers.begin(), outcome.winning_buyers.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return outcome;
}

void Scenario::validate() const {
  if (bit_length < 2 || bit_length > 32) throw AuctionError("bit_length must be in [2, 32]");
  if (d_max < 1) throw AuctionError("d_max must be at least 1");
  if (!(radius_m > 0.0)) throw AuctionError("radius_m must be positive");
  if (!(area_m > 0.0)) throw AuctionError("area_m must be positive");
  if (sellers.empty()) throw AuctionError("scenario has no sellers");
  if (buyers.empty()) throw AuctionError("scenario has no buyers");
  const Money limit = Money{1} << bit_length;
  std::set<Id> seen;
  for (const auto& s : sellers) {
    if (!seen.insert(s.id).second) throw AuctionError("duplicate seller id " + std::to_string(s.id));
    if (s.request_value == 0 || s.request_value >= limit)
      throw AuctionError("seller " + std::to_string(s.id) + " request value out of range");
    if (s.request_count < 1) throw AuctionError("seller " + std::to_string(s.id) + " has c < 1");
  }
  seen.clear();
  for (const auto& b : buyers) {
    if (!seen.insert(b.id).second) throw AuctionError("duplicate buyer id " + std::to_string(b.id));
    if (b.bid_value == 0 || b.bid_value >= limit)
      throw AuctionError("buyer " + std::to_string(b.id) + " bid value out of range");
    if (b.bid_count < 1 || b.bid_count > d_max)
      throw AuctionError("buyer " + std::to_string(b.id) + " bid count outside [1, D]");
    if (!(b.x >= 0.0 && b.x <= area_m && b.y >= 0.0 && b.y <= area_m))
      throw AuctionError("buyer " + std::to_string(b.id) + " located outside the area");
  }
}

ClearTrace trace_clear_auction(const Scenario& scenario) {
  scenario.validate();
  ClearTrace trace;
  trace.graph = build_conflict_graph(scenario.buyers, scenario.radius_m);
  const auto groups = form_groups(trace.graph);

  std::map<Id, const BuyerTuple*> by_id;
  for (const auto& b : scenario.buyers) by_id[b.id] = &b;

  std::vector<VbgTuple> vbgs;
  for (const auto& g : groups) {
    std::vector<BuyerTuple> members;
    for (Id id : g.members) members.push_back(*by_id.at(id));
    trace.splits.push_back(mmin_split_and_bid(g, members, scenario.d_max));
    const auto& v = trace.splits.back().vbgs;
    vbgs.insert(vbgs.end(), v.begin(), v.end());
  }
  trace.determination = determine_winners(scenario.sellers, vbgs);
  trace.outcome = price(trace.determination, trace.splits);
  return trace;
}

AuctionOutcome run_clear_auction(const Scenario& scenario) {
  return trace_clear_auction(scenario).outcome;
}

}  // namespace ppmcsa::auction
