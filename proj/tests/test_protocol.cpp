#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <random>
#include <thread>

#include "ppmcsa/builders.hpp"
#include "ppmcsa/garbling.hpp"
#include "ppmcsa/ot.hpp"
#include "ppmcsa/protocol.hpp"
#include "support.hpp"

using namespace ppmcsa;
using namespace ppmcsa::protocol;

namespace {

auction::BuyerTuple buyer(auction::Id id, double x, double y, auction::Money b, std::uint32_t d) {
  auction::BuyerTuple t;
  t.id = id;
  t.x = x;
  t.y = y;
  t.bid_value = b;
  t.bid_count = d;
  return t;
}

// M=3, N=6, T=2, D=3 with at least one winning trade.
auction::Scenario desk_scenario() {
  auction::Scenario sc;
  sc.d_max = 3;
  sc.sellers = {{1, 2, 1, false}, {2, 3, 2, false}, {3, 12, 1, false}};
  // Three clusters of two interfering buyers give groups {1,3,5} and {2,4,6}.
  sc.buyers = {buyer(1, 0, 0, 9, 3),      buyer(2, 0, 10, 7, 2),    buyer(3, 1500, 0, 8, 2),
               buyer(4, 1500, 10, 6, 1),  buyer(5, 0, 1500, 5, 3),  buyer(6, 0, 1510, 9, 2)};
  return sc;
}

// Forwards to an inner channel and drops the connection after `limit` sends.
class CuttingChannel : public Channel {
 public:
  CuttingChannel(Channel& inner, int limit) : inner_(inner), left_(limit) {}
  void send_bytes(std::span<const std::uint8_t> bytes) override {
    if (left_-- <= 0) {
      inner_.close();
      throw TransportError("link cut");
    }
    inner_.send_bytes(bytes);
  }
  void recv_bytes(std::span<std::uint8_t> out) override { inner_.recv_bytes(out); }
  void close() override { inner_.close(); }

 private:
  Channel& inner_;
  int left_;
};

struct Pair {
  submission::SealedSubmissions subs;
  SessionConfig a, b;
};

Pair make_pair(const auction::Scenario& sc, std::uint64_t seed = 3) {
  Pair p;
  p.a.role = Role::Auctioneer;
  p.b.role = Role::Agent;
  p.a.keys = submission::KeyPair::from_seed(seed, "auctioneer");
  p.b.keys = submission::KeyPair::from_seed(seed, "agent");
  for (auto* c : {&p.a, &p.b}) {
    c->bit_length = sc.bit_length;
    c->d_max = sc.d_max;
    c->radius_m = sc.radius_m;
    c->seed = seed;
  }
  p.subs = submission::seal_scenario(sc, p.a.keys.public_key, p.b.keys.public_key, seed);
  return p;
}

std::size_t frame_index(FrameType t) { return static_cast<std::size_t>(t); }

}  // namespace

TEST_CASE("framing") {
  auto [x, y] = make_loopback_pair();
  FramedLink a(*x), b(*y);
  a.send(FrameType::Result, {1, 2, 3});
  const Frame f = b.recv();
  CHECK(f.type == FrameType::Result);
  CHECK(f.payload == std::vector<std::uint8_t>{1, 2, 3});
  CHECK(encode_frame(f) == std::vector<std::uint8_t>{8, 0, 0, 0, 3, 1, 2, 3});
  CHECK(a.stats().bytes_sent[frame_index(FrameType::Result)] == 8);
  CHECK(b.stats().bytes_received[frame_index(FrameType::Result)] == 8);
  a.send(FrameType::Decoder, {});
  CHECK_THROWS_AS(b.expect(FrameType::Result), TransportError);
  x->close();
  CHECK_THROWS_AS(b.recv(), TransportError);
}

TEST_CASE("payload codec") {
  Writer w;
  w.u8(7).u32(0x01020304).u64(5).f64(-2.5).blob(std::vector<std::uint8_t>{9, 9});
  const auto bytes = w.take();
  CHECK(bytes[1] == 1);
  CHECK(bytes[4] == 4);
  Reader r(bytes);
  CHECK(r.u8() == 7);
  CHECK(r.u32() == 0x01020304u);
  CHECK(r.u64() == 5);
  CHECK(r.f64() == -2.5);
  CHECK(r.blob() == std::vector<std::uint8_t>{9, 9});
  r.expect_done();
  Reader short_reader{std::span<const std::uint8_t>(bytes).first(3)};
  short_reader.u8();
  CHECK_THROWS_AS(short_reader.u32(), TransportError);
}

TEST_CASE("one AND gate costs one table plus framing") {
  circuit::Circuit c;
  const auto a = c.add_input("a", circuit::Party::Garbler, 1);
  const auto b = c.add_input("b", circuit::Party::Evaluator, 1);
  c.add_output("o", circuit::Bus{{c.and_gate(a[0], b[0])}});
  gc::Garbler g(c, 1);
  std::vector<std::uint8_t> payload;
  for (const auto& t : g.garble_next(SIZE_MAX)) gc::append_gate(payload, t);
  auto [x, y] = make_loopback_pair();
  FramedLink link(*x);
  link.send(FrameType::GarbledGates, payload);
  CHECK(link.stats().bytes_sent[frame_index(FrameType::GarbledGates)] == 4 * 16 + 4 + kFrameHeaderBytes);
}

TEST_CASE("loopback session on the desk scenario") {
  const auto sc = desk_scenario();
  const auto expect = auction::run_clear_auction(sc);
  REQUIRE(expect.winning_vbg_count > 0);
  for (auto mode : {oblivious::Mode::Original, oblivious::Mode::Improved}) {
    SessionOptions opt;
    opt.mode = mode;
    opt.seed = 5;
    opt.gates_per_frame = 100;
    const auto res = loopback_session(sc, opt);
    CHECK(res.auctioneer.params.groups.size() == 2);
    CHECK(res.auctioneer.outcome == expect);
    CHECK(res.agent.outcome == expect);
    const auto& ma = res.auctioneer.metrics;
    const auto& mb = res.agent.metrics;
    CHECK(ma.tables_streamed == ma.and_gates);
    CHECK(mb.tables_streamed == mb.and_gates);
    CHECK(ma.circuit_hash == mb.circuit_hash);
    CHECK(ma.decoder_buses == ma.reveal_buses);

    // Every byte on the wire is accounted for by the size formulas.
    const auto gates = frame_index(FrameType::GarbledGates);
    const std::uint64_t gate_frames = ma.traffic.frames_received[gates];
    CHECK(gate_frames == (ma.and_gates + 99) / 100);
    CHECK(ma.traffic.bytes_received[gates] == ma.and_gates * (4 + 4 * 16) + gate_frames * kFrameHeaderBytes);
    const auto ot = frame_index(FrameType::OtMsg);
    CHECK(ma.traffic.bytes_received[ot] + ma.traffic.bytes_sent[ot] ==
          ot::kPointBytes + ma.ot_count * (ot::kPointBytes + ot::kResponseBytes) + 3 * kFrameHeaderBytes);
    const std::size_t garbler_bits = 2 * 16 * 6 + 16 * 3;  // b and d per buyer, s per seller
    CHECK(ma.traffic.bytes_received[frame_index(FrameType::InputLabels)] ==
          16 * (2 + garbler_bits) + kFrameHeaderBytes);
    CHECK(ma.ot_count == garbler_bits);
    for (std::size_t t = 1; t < kFrameTypes; ++t) {
      CHECK(ma.traffic.bytes_sent[t] == mb.traffic.bytes_received[t]);
      CHECK(ma.traffic.bytes_received[t] == mb.traffic.bytes_sent[t]);
    }
  }
}

TEST_CASE("each role receives only its share of the material") {
  const auto res = loopback_session(desk_scenario(), {});
  using F = FrameType;
  CHECK(res.agent.metrics.received_frames ==
        std::vector<F>{F::EncShares, F::Grouping, F::Handshake, F::OtMsg, F::Result});
  const auto& ar = res.auctioneer.metrics.received_frames;
  REQUIRE(ar.size() >= 6);
  CHECK(ar[0] == F::Handshake);
  CHECK(ar[1] == F::InputLabels);
  CHECK(ar[2] == F::OtMsg);
  CHECK(ar[3] == F::OtMsg);
  for (std::size_t i = 4; i + 1 < ar.size(); ++i) CHECK(ar[i] == F::GarbledGates);
  CHECK(ar.back() == F::Decoder);
}

TEST_CASE("the agent's forwarded envelopes open only with the agent key") {
  const auto sc = desk_scenario();
  const auto p = make_pair(sc);
  auto [x, y] = make_loopback_pair();
  std::thread auctioneer([&] {
    try {
      run_auctioneer(p.a, *x, p.subs);
    } catch (...) {
    }
  });
  FramedLink link(*y);
  const auto payload = link.expect(FrameType::EncShares);
  y->close();
  auctioneer.join();
  Reader r(payload);
  const std::uint32_t m = r.u32();
  CHECK(m == 3);
  for (std::uint32_t i = 0; i < m; ++i) {
    const auto id = r.u32();
    const auto env = r.blob();
    CHECK_NOTHROW(submission::open_share(env, id, submission::Field::RequestValue, p.b.keys));
    CHECK_THROWS_AS(submission::open_share(env, id, submission::Field::RequestValue, p.a.keys),
                    submission::EnvelopeError);
  }
}

TEST_CASE("handshake mismatches abort before any garbling") {
  const auto sc = desk_scenario();
  SUBCASE("bit length") {
    SessionOptions opt;
    opt.agent_bit_length = 12;
    CHECK_THROWS_WITH_AS(loopback_session(sc, opt), doctest::Contains("handshake mismatch"), SessionError);
  }
  SUBCASE("D") {
    SessionOptions opt;
    opt.agent_d_max = 4;
    CHECK_THROWS_WITH_AS(loopback_session(sc, opt), doctest::Contains("handshake mismatch"), SessionError);
  }
  SUBCASE("mode") {
    auto p = make_pair(sc);
    p.b.mode = oblivious::Mode::Original;
    auto [x, y] = make_loopback_pair();
    CHECK_THROWS_WITH_AS(run_pair(p.subs, p.a, p.b, *x, *y), doctest::Contains("auction mode"), SessionError);
  }
}

TEST_CASE("a dropped link aborts both roles without an outcome") {
  const auto sc = desk_scenario();
  for (int limit : {0, 2, 4, 6, 9}) {
    CAPTURE(limit);
    auto p = make_pair(sc);
    p.a.gates_per_frame = p.b.gates_per_frame = 200;
    auto [x, y] = make_loopback_pair();
    CuttingChannel cut(*y, limit);
    std::atomic<bool> agent_done{false};
    std::thread agent([&] {
      try {
        run_agent(p.b, cut);
        agent_done = true;
      } catch (...) {
      }
    });
    bool auctioneer_done = false;
    try {
      run_auctioneer(p.a, *x, p.subs);
      auctioneer_done = true;
    } catch (const std::exception&) {
    }
    agent.join();
    CHECK_FALSE(auctioneer_done);
    CHECK_FALSE(agent_done);
  }
}

TEST_CASE("bidders with unreadable auctioneer envelopes are excluded") {
  auto sc = desk_scenario();
  auto p = make_pair(sc);
  p.subs.buyers[2].b_auctioneer[10] ^= 1;  // buyer 3
  p.subs.sellers[0].s_auctioneer[5] ^= 1;  // seller 1
  auto [x, y] = make_loopback_pair();
  const auto res = run_pair(p.subs, p.a, p.b, *x, *y);
  CHECK(res.auctioneer.excluded_bidders == std::vector<auction::Id>{1, 3});
  auto reduced = sc;
  reduced.buyers.erase(reduced.buyers.begin() + 2);
  reduced.sellers.erase(reduced.sellers.begin());
  CHECK(res.auctioneer.outcome == auction::run_clear_auction(reduced));
  CHECK(res.agent.outcome == res.auctioneer.outcome);
}

TEST_CASE("an unreadable agent envelope aborts the session") {
  auto p = make_pair(desk_scenario());
  p.subs.buyers[0].d_agent[20] ^= 1;
  auto [x, y] = make_loopback_pair();
  CHECK_THROWS_WITH_AS(run_pair(p.subs, p.a, p.b, *x, *y), doctest::Contains("envelope"), SessionError);
}

TEST_CASE("empty-winner scenario completes every phase") {
  auto sc = desk_scenario();
  for (auto& s : sc.sellers) s.request_value = 60000;
  const auto res = loopback_session(sc, {});
  CHECK(res.auctioneer.outcome == auction::AuctionOutcome{});
  CHECK(res.agent.outcome == auction::AuctionOutcome{});
  CHECK(res.auctioneer.metrics.traffic.frames_received[frame_index(FrameType::Decoder)] == 1);
  CHECK(res.agent.metrics.traffic.frames_received[frame_index(FrameType::Result)] == 1);
}

TEST_CASE("transcript sizes do not depend on sensitive values") {
  const auto sc = desk_scenario();
  auto other = sc;
  for (auto& s : other.sellers) s.request_value = 1000 + s.request_value * 17;
  for (auto& b : other.buyers) {
    b.bid_value = 60000 - b.bid_value;
    b.bid_count = 1 + (b.bid_count + 1) % 3;
  }
  const auto r1 = loopback_session(sc, {});
  const auto r2 = loopback_session(other, {});
  CHECK_FALSE(r1.auctioneer.outcome == r2.auctioneer.outcome);
  CHECK(r1.auctioneer.metrics.circuit_hash == r2.auctioneer.metrics.circuit_hash);
  CHECK(r1.auctioneer.metrics.traffic.bytes_sent == r2.auctioneer.metrics.traffic.bytes_sent);
  CHECK(r1.auctioneer.metrics.traffic.bytes_received == r2.auctioneer.metrics.traffic.bytes_received);
  CHECK(r1.auctioneer.metrics.traffic.frames_received == r2.auctioneer.metrics.traffic.frames_received);
}

TEST_CASE("TCP and loopback agree") {
  const auto sc = desk_scenario();
  SessionOptions opt;
  opt.seed = 8;
  const auto tcp = tcp_session(sc, opt);
  const auto loop = loopback_session(sc, opt);
  CHECK(tcp.auctioneer.outcome == loop.auctioneer.outcome);
  CHECK(tcp.agent.outcome == loop.agent.outcome);
  CHECK(tcp.auctioneer.metrics.traffic.bytes_sent == loop.auctioneer.metrics.traffic.bytes_sent);
  CHECK(tcp.auctioneer.metrics.traffic.bytes_received == loop.auctioneer.metrics.traffic.bytes_received);
}

TEST_CASE("sessions without a fixed seed still agree with the oracle") {
  const auto sc = desk_scenario();
  auto p = make_pair(sc);
  p.a.seed.reset();
  p.b.seed.reset();
  auto [x, y] = make_loopback_pair();
  const auto res = run_pair(p.subs, p.a, p.b, *x, *y);
  CHECK(res.auctioneer.outcome == auction::run_clear_auction(sc));
}

TEST_CASE("random scenarios over loopback") {
  std::mt19937_64 rng(77);
  testing_support::RandomShape shape;
  shape.max_sellers = 4;
  shape.max_buyers = 8;
  shape.d_max = 3;
  for (int i = 0; i < 10; ++i) {
    const auto sc = testing_support::random_scenario(rng, shape);
    SessionOptions opt;
    opt.seed = i;
    opt.mode = i % 2 ? oblivious::Mode::Original : oblivious::Mode::Improved;
    CHECK(loopback_session(sc, opt).auctioneer.outcome == auction::run_clear_auction(sc));
  }
}
