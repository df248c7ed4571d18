#pragma once

// Shared helpers for the test binaries: small random scenarios with plenty of
// ties and profitable trades.

#include <algorithm>
#include <cstdint>
#include <random>

#include "ppmcsa/auction_core.hpp"

namespace testing_support {

using namespace ppmcsa;

struct RandomShape {
  std::size_t min_sellers = 1;
  std::size_t max_sellers = 6;
  std::size_t min_buyers = 2;
  std::size_t max_buyers = 20;
  std::uint32_t d_max = 4;
  unsigned bit_length = 16;
  std::uint32_t max_count = 3;   // c
  std::size_t min_groups = 1;
  double area = 1200.0;
  double radius = 400.0;
};

inline std::uint64_t uniform(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

inline std::size_t group_count(const auction::Scenario& sc) {
  return auction::form_groups(auction::build_conflict_graph(sc.buyers, sc.radius_m)).size();
}

inline auction::Scenario random_scenario(std::mt19937_64& rng, const RandomShape& shape) {
  for (;;) {
    auction::Scenario sc;
    sc.bit_length = shape.bit_length;
    sc.d_max = shape.d_max;
    sc.radius_m = shape.radius;
    sc.area_m = shape.area;
    // Small value ranges make ties common; the scale varies which side is richer.
    const std::uint64_t cap = (std::uint64_t{1} << shape.bit_length) - 1;
    const std::uint64_t s_hi = std::min<std::uint64_t>(cap, uniform(rng, 2, 40));
    const std::uint64_t b_hi = std::min<std::uint64_t>(cap, uniform(rng, 2, 40));
    const std::size_t m = uniform(rng, shape.min_sellers, shape.max_sellers);
    const std::size_t n = uniform(rng, shape.min_buyers, shape.max_buyers);
    for (std::size_t i = 0; i < m; ++i)
      sc.sellers.push_back({static_cast<auction::Id>(i + 1), uniform(rng, 1, s_hi),
                            static_cast<std::uint32_t>(uniform(rng, 1, shape.max_count)), false});
    std::uniform_real_distribution<double> pos(0.0, shape.area);
    for (std::size_t i = 0; i < n; ++i) {
      auction::BuyerTuple b;
      b.id = static_cast<auction::Id>(i + 1);
      b.x = pos(rng);
      b.y = pos(rng);
      b.bid_value = uniform(rng, 1, b_hi);
      b.bid_count = static_cast<std::uint32_t>(uniform(rng, 1, shape.d_max));
      sc.buyers.push_back(b);
    }
    // Shuffle ids so that submission order and id order differ.
    std::vector<auction::Id> ids(m);
    for (std::size_t i = 0; i < m; ++i) ids[i] = static_cast<auction::Id>(i + 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < m; ++i) sc.sellers[i].id = ids[i] * 3;
    if (group_count(sc) >= shape.min_groups) return sc;
  }
}

}  // namespace testing_support
