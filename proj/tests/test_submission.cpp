#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ppmcsa/submission.hpp"

using namespace ppmcsa;
using namespace ppmcsa::submission;

TEST_CASE("share arithmetic") {
  CHECK(SharePair{65530, 11, 16}.reconstruct() == 5);
  crypto::Prg rng(1);
  const auto p = split(5, 16, rng);
  CHECK(p.share_b == ((5 - p.share_a) & 0xffff));
  const auto z = split(0, 16, rng);
  CHECK(z.share_b == ((65536 - z.share_a) & 0xffff));
  CHECK(z.reconstruct() == 0);
  CHECK_THROWS_AS(split(1u << 16, 16, rng), std::invalid_argument);
  CHECK_THROWS_AS(split(1, 0, rng), std::invalid_argument);
}

TEST_CASE("random splits reconstruct") {
  crypto::Prg rng(2);
  std::mt19937_64 gen(2);
  for (int i = 0; i < 10000; ++i) {
    const unsigned bits = 1 + gen() % 32;
    const std::uint64_t x = gen() & ((std::uint64_t{1} << bits) - 1);
    const auto p = split(x, bits, rng);
    REQUIRE(p.share_a < (std::uint64_t{1} << bits));
    REQUIRE(p.share_b < (std::uint64_t{1} << bits));
    REQUIRE(p.reconstruct() == x);
  }
}

TEST_CASE("share_a is uniform on its low bits") {
  crypto::Prg rng(3);
  std::array<int, 16> bins{};
  const int n = 16000;
  for (int i = 0; i < n; ++i) ++bins[split(42, 16, rng).share_a & 15];
  double chi2 = 0;
  for (int b : bins) chi2 += (b - n / 16.0) * (b - n / 16.0) / (n / 16.0);
  // 15 degrees of freedom, p = 0.001.
  CHECK(chi2 < 37.7);
}

TEST_CASE("in-circuit reconstruction") {
  const auto run = [](std::uint64_t a, std::uint64_t b) {
    circuit::Circuit c;
    const auto x = c.add_input("a", circuit::Party::Evaluator, 16);
    const auto y = c.add_input("b", circuit::Party::Garbler, 16);
    const auto out = reconstruct_in_circuit(c, x, y);
    return circuit::Circuit::read(c.evaluate({{"a", a}, {"b", b}}), out);
  };
  CHECK(run(65530, 11) == 5);
  CHECK(run(0, 777) == 777);
  std::mt19937_64 gen(4);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t a = gen() & 0xffff, b = gen() & 0xffff;
    CHECK(run(a, b) == ((a + b) & 0xffff));
  }
  circuit::Circuit c;
  CHECK_THROWS_AS(reconstruct_in_circuit(c, c.add_input("a", circuit::Party::Evaluator, 16),
                                         c.add_input("b", circuit::Party::Garbler, 15)),
                  circuit::CircuitError);
}

TEST_CASE("envelopes") {
  const auto ka = KeyPair::from_seed(1, "auctioneer");
  const auto kb = KeyPair::from_seed(1, "agent");
  crypto::Prg rng(5);

  SUBCASE("seller round-trip") {
    const auto s = seal_seller({7, 42, 3, false}, 16, ka.public_key, kb.public_key, rng);
    CHECK(s.request_count == 3);
    CHECK(s.s_auctioneer.size() == kEnvelopeBytes);
    const std::uint64_t a = open_seller(s, Role::Auctioneer, ka);
    const std::uint64_t b = open_seller(s, Role::Agent, kb);
    CHECK(((a + b) & 0xffff) == 42);
  }
  SUBCASE("buyer round-trip, both fields") {
    auction::BuyerTuple t;
    t.id = 9;
    t.bid_value = 31;
    t.bid_count = 10;
    const auto s = seal_buyer(t, 16, 10, ka.public_key, kb.public_key, rng);
    const auto [ba, da] = open_buyer(s, Role::Auctioneer, ka);
    const auto [bb, db] = open_buyer(s, Role::Agent, kb);
    CHECK(((ba + bb) & 0xffff) == 31);
    CHECK(((da + db) & 0xffff) == 10);
  }
  SUBCASE("bid counts are clamped to D") {
    auction::BuyerTuple t;
    t.id = 2;
    t.bid_value = 1;
    t.bid_count = 15;
    const auto s = seal_buyer(t, 16, 4, ka.public_key, kb.public_key, rng);
    CHECK(((open_buyer(s, Role::Auctioneer, ka).second + open_buyer(s, Role::Agent, kb).second) & 0xffff) == 4);
  }
  SUBCASE("roles cannot open each other's envelopes") {
    const auto s = seal_seller({7, 42, 3, false}, 16, ka.public_key, kb.public_key, rng);
    CHECK_THROWS_AS(open_seller(s, Role::Auctioneer, kb), EnvelopeError);
    CHECK_THROWS_AS(open_share(s.s_agent, 7, Field::RequestValue, ka), EnvelopeError);
  }
  SUBCASE("tampering and rebinding are rejected") {
    auto env = seal_share(123, 4, Field::BidValue, ka.public_key);
    CHECK(open_share(env, 4, Field::BidValue, ka) == 123);
    CHECK_THROWS_AS(open_share(env, 5, Field::BidValue, ka), EnvelopeError);
    CHECK_THROWS_AS(open_share(env, 4, Field::BidCount, ka), EnvelopeError);
    for (std::size_t i : {0u, 31u, 40u, 56u}) {
      auto bad = env;
      bad[i] ^= 1;
      CHECK_THROWS_AS(open_share(bad, 4, Field::BidValue, ka), EnvelopeError);
    }
    env.pop_back();
    CHECK_THROWS_AS(open_share(env, 4, Field::BidValue, ka), EnvelopeError);
  }
}

TEST_CASE("sealed submissions serialize to JSON") {
  auction::Scenario sc;
  sc.bit_length = 12;
  sc.d_max = 3;
  sc.sellers = {{1, 100, 2, false}, {2, 7, 1, false}};
  auction::BuyerTuple b;
  b.id = 5;
  b.x = 10.5;
  b.y = 20.25;
  b.bid_value = 9;
  b.bid_count = 3;
  sc.buyers = {b};
  const auto ka = KeyPair::from_seed(2, "auctioneer");
  const auto kb = KeyPair::from_seed(2, "agent");
  const auto subs = seal_scenario(sc, ka.public_key, kb.public_key, 8);
  CHECK(subs.bit_length == 12);
  const auto back = submissions_from_json(nlohmann::json::parse(to_json(subs).dump()));
  REQUIRE(back.sellers.size() == 2);
  REQUIRE(back.buyers.size() == 1);
  CHECK(back.buyers[0].x == 10.5);
  CHECK(back.buyers[0].y == 20.25);
  CHECK(back.sellers[0].s_agent == subs.sellers[0].s_agent);
  CHECK(((open_seller(back.sellers[0], Role::Auctioneer, ka) + open_seller(back.sellers[0], Role::Agent, kb)) &
         0xfff) == 100);
  const auto doc = to_json(subs);
  CHECK(doc["buyers"][0].contains("b_auctioneer"));
  CHECK_FALSE(doc["buyers"][0].contains("b"));
  CHECK_THROWS_AS(submissions_from_json(nlohmann::json::parse("{\"sellers\": 3}")), EnvelopeError);
}
