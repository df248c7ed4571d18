#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ppmcsa/builders.hpp"
#include "ppmcsa/garbling.hpp"
#include "ppmcsa/ot.hpp"

using namespace ppmcsa;
using namespace ppmcsa::ot;

namespace {

Block random_block(std::mt19937_64& rng) { return {rng(), rng()}; }

}  // namespace

TEST_CASE("single transfer delivers the chosen string") {
  std::mt19937_64 rng(1);
  const OtSenderInput in{random_block(rng), random_block(rng)};
  Transcript t0, t1;
  CHECK(ot_exchange(in, {false}, 5, &t0) == in.x0);
  CHECK(ot_exchange(in, {true}, 5, &t1) == in.x1);
  CHECK(t0.message_bytes == std::vector<std::size_t>{kPointBytes, kPointBytes, kResponseBytes});
  CHECK(t0.message_bytes == t1.message_bytes);
}

TEST_CASE("batches") {
  std::mt19937_64 rng(2);
  SUBCASE("256 random instances") {
    std::vector<OtSenderInput> inputs;
    std::vector<bool> choices;
    for (int i = 0; i < 256; ++i) {
      inputs.push_back({random_block(rng), random_block(rng)});
      choices.push_back(rng() & 1);
    }
    Transcript t;
    const auto got = ot_batch(inputs, choices, 9, &t);
    REQUIRE(got.size() == 256);
    for (int i = 0; i < 256; ++i) CHECK(got[i] == (choices[i] ? inputs[i].x1 : inputs[i].x0));
    CHECK(t.total() == kPointBytes + 256 * kPointBytes + 256 * kResponseBytes);
  }
  SUBCASE("n = 1 agrees with a single exchange") {
    const OtSenderInput in{random_block(rng), random_block(rng)};
    CHECK(ot_batch(std::span(&in, 1), {true}, 3).at(0) == ot_exchange(in, {true}, 3));
  }
  SUBCASE("n = 0 is rejected") {
    CHECK_THROWS_AS(ot_batch({}, {}, 1), OtError);
    crypto::Prg prg(1);
    CHECK_THROWS_AS(OtReceiver(prg, {}), OtError);
  }
  SUBCASE("transcript size does not depend on the choices") {
    std::vector<OtSenderInput> inputs(32, OtSenderInput{random_block(rng), random_block(rng)});
    Transcript zeros, ones;
    ot_batch(inputs, std::vector<bool>(32, false), 4, &zeros);
    ot_batch(inputs, std::vector<bool>(32, true), 4, &ones);
    CHECK(zeros.message_bytes == ones.message_bytes);
  }
}

TEST_CASE("state machine misuse and malformed messages") {
  crypto::Prg ps(1, "s"), pr(2, "r");
  OtSender sender(ps);
  OtReceiver receiver(pr, {true, false});
  const OtSenderInput pair[2] = {{{1, 2}, {3, 4}}, {{5, 6}, {7, 8}}};
  CHECK_THROWS_AS(sender.respond(std::vector<std::uint8_t>(64), pair), OtError);
  const auto setup = sender.setup();
  CHECK_THROWS_AS(sender.setup(), OtError);
  CHECK_THROWS_AS(receiver.finish(std::vector<std::uint8_t>(64)), OtError);
  auto bad = setup;
  std::fill(bad.begin(), bad.end(), 0xff);
  {
    crypto::Prg p(3);
    OtReceiver r(p, {true});
    CHECK_THROWS_WITH_AS(r.choose(bad), doctest::Contains("malformed"), OtError);
  }
  auto choice = receiver.choose(setup);
  CHECK(choice.size() == 2 * kPointBytes);
  auto wrong = choice;
  std::fill(wrong.begin(), wrong.begin() + 32, 0xff);
  {
    crypto::Prg p(4);
    OtSender s(p);
    s.setup();
    CHECK_THROWS_AS(s.respond(wrong, pair), OtError);
  }
  CHECK_THROWS_AS(sender.respond(std::span(choice).first(32), pair), OtError);
  const auto resp = sender.respond(choice, pair);
  const auto got = receiver.finish(resp);
  CHECK(got[0] == pair[0].x1);
  CHECK(got[1] == pair[1].x0);
}

TEST_CASE("transferred labels drive a garbled circuit") {
  circuit::Circuit c;
  const auto a = c.add_input("a", circuit::Party::Garbler, 16);
  const auto b = c.add_input("b", circuit::Party::Evaluator, 16);
  c.add_output("out", circuit::build_adder(c, a, b));
  const auto g = gc::garble(c, 31, {"out"});
  const std::uint64_t evaluator_value = 54321;
  std::vector<OtSenderInput> inputs;
  std::vector<bool> choices;
  for (std::size_t i = 0; i < 16; ++i) {
    inputs.push_back({g.encoding.at("b")[i].label0, g.encoding.at("b")[i].label1});
    choices.push_back((evaluator_value >> i) & 1u);
  }
  const auto labels = ot_batch(inputs, choices, 17);
  const auto out = gc::evaluate(c, g.garbled, {{"a", gc::encode_inputs(g, "a", 12345)}, {"b", labels}}, g.constants);
  CHECK(g.decoder.decode_value("out", out.at("out")) == ((12345 + evaluator_value) & 0xffff));
}
