#include "ppmcsa/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <exception>
#include <set>
#include <thread>

#include "ppmcsa/garbling.hpp"
#include "ppmcsa/ot.hpp"

namespace ppmcsa::protocol {
namespace {

using auction::Id;
using circuit::Party;
using crypto::Block;
using oblivious::PublicParams;

class PhaseClock {
 public:
  explicit PhaseClock(RunMetrics& m) : metrics_(m), start_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    metrics_.phase_ms[phase] += std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
  }

 private:
  RunMetrics& metrics_;
  std::chrono::steady_clock::time_point start_;
};

crypto::Prg session_prg(const SessionConfig& config, std::string_view domain) {
  if (config.seed) return crypto::Prg(*config.seed, domain);
  return crypto::Prg::from_os();
}

void put_block(Writer& w, const Block& b) {
  const auto bytes = b.to_bytes();
  w.bytes(bytes);
}

Block get_block(Reader& r) { return Block::from_bytes(r.bytes(gc::kLabelBytes)); }

std::vector<std::uint8_t> handshake_payload(const PublicParams& params) {
  Writer w;
  w.u8(kProtocolVersion).u8(static_cast<std::uint8_t>(params.mode));
  const auto h = params.hash();
  w.bytes(h);
  return w.take();
}

std::vector<std::uint8_t> grouping_payload(const PublicParams& params) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(params.sellers.size()));
  for (const auto& s : params.sellers) w.u32(s.id).u32(s.request_count);
  w.u32(static_cast<std::uint32_t>(params.groups.size()));
  for (const auto& g : params.groups) {
    w.u32(g.group_id).u32(static_cast<std::uint32_t>(g.members.size()));
    for (Id m : g.members) w.u32(m);
  }
  return w.take();
}

PublicParams parse_grouping(std::span<const std::uint8_t> payload, const SessionConfig& config) {
  Reader r(payload);
  PublicParams p;
  p.bit_length = config.bit_length;
  p.d_max = config.d_max;
  p.mode = config.mode;
  const std::uint32_t m = r.u32();
  for (std::uint32_t i = 0; i < m; ++i) {
    oblivious::PublicSeller s;
    s.id = r.u32();
    s.request_count = r.u32();
    p.sellers.push_back(s);
  }
  const std::uint32_t t = r.u32();
  for (std::uint32_t i = 0; i < t; ++i) {
    oblivious::PublicGroup g;
    g.group_id = r.u32();
    const std::uint32_t n = r.u32();
    for (std::uint32_t k = 0; k < n; ++k) g.members.push_back(r.u32());
    p.groups.push_back(std::move(g));
  }
  r.expect_done();
  return p;
}

// Agent's envelopes, forwarded untouched in ascending id order.
struct AgentShares {
  std::map<Id, submission::Envelope> seller_s;
  std::map<Id, std::pair<submission::Envelope, submission::Envelope>> buyer_bd;
};

std::vector<std::uint8_t> shares_payload(const AgentShares& shares) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(shares.seller_s.size()));
  for (const auto& [id, env] : shares.seller_s) w.u32(id).blob(env);
  w.u32(static_cast<std::uint32_t>(shares.buyer_bd.size()));
  for (const auto& [id, bd] : shares.buyer_bd) w.u32(id).blob(bd.first).blob(bd.second);
  return w.take();
}

AgentShares parse_shares(std::span<const std::uint8_t> payload) {
  Reader r(payload);
  AgentShares out;
  const std::uint32_t m = r.u32();
  for (std::uint32_t i = 0; i < m; ++i) {
    const Id id = r.u32();
    out.seller_s[id] = r.blob();
  }
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const Id id = r.u32();
    auto b = r.blob();
    auto d = r.blob();
    out.buyer_bd[id] = {std::move(b), std::move(d)};
  }
  r.expect_done();
  return out;
}

void check_handshake(std::span<const std::uint8_t> ours, std::span<const std::uint8_t> theirs) {
  if (theirs.size() != ours.size()) throw SessionError("handshake: malformed message");
  if (theirs[0] != ours[0]) throw SessionError("handshake mismatch: protocol version");
  if (theirs[1] != ours[1]) throw SessionError("handshake mismatch: auction mode");
  if (!std::equal(ours.begin(), ours.end(), theirs.begin()))
    throw SessionError("handshake mismatch: public parameters differ");
}

// Input buses of one party in circuit declaration order.
std::vector<const circuit::InputBus*> buses_of(const circuit::Circuit& c, Party owner) {
  std::vector<const circuit::InputBus*> out;
  for (const auto& in : c.inputs())
    if (in.owner == owner) out.push_back(&in);
  return out;
}

std::vector<std::uint8_t> result_payload(const oblivious::AuctionCircuit& ac, const oblivious::Revealed& rv) {
  Writer w;
  for (const auto& name : ac.reveal.buses) {
    const std::size_t width = ac.circuit.output(name).bus.width();
    const std::uint64_t v = rv.at(name);
    for (std::size_t byte = 0; byte < (width + 7) / 8; ++byte) w.u8(static_cast<std::uint8_t>(v >> (8 * byte)));
  }
  return w.take();
}

oblivious::Revealed parse_result(const oblivious::AuctionCircuit& ac, std::span<const std::uint8_t> payload) {
  Reader r(payload);
  oblivious::Revealed out;
  for (const auto& name : ac.reveal.buses) {
    const std::size_t width = ac.circuit.output(name).bus.width();
    std::uint64_t v = 0;
    for (std::size_t byte = 0; byte < (width + 7) / 8; ++byte) v |= std::uint64_t{r.u8()} << (8 * byte);
    if (width < 64 && (v >> width) != 0) throw SessionError("result: value exceeds bus width");
    out[name] = v;
  }
  r.expect_done();
  return out;
}

void fill_circuit_metrics(RunMetrics& m, const oblivious::AuctionCircuit& ac) {
  m.and_gates = ac.circuit.and_count();
  m.ot_count = ac.circuit.input_bits(Party::Evaluator);
  m.circuit_hash = ac.circuit.hash();
  m.params_hash = ac.params.hash();
  m.reveal_buses = ac.reveal.buses.size();
}

// Runs `body`; on any failure closes the channel so the peer unblocks, then rethrows.
template <typename F>
SessionResult guarded(Channel& channel, F&& body) {
  try {
    return body();
  } catch (...) {
    channel.close();
    throw;
  }
}

}  // namespace

SessionResult run_auctioneer(const SessionConfig& config, Channel& channel,
                             const submission::SealedSubmissions& subs) {
  return guarded(channel, [&] {
    SessionResult res;
    RunMetrics& m = res.metrics;
    PhaseClock clock(m);
    FramedLink link(channel);
    if (subs.bit_length != config.bit_length)
      throw SessionError("submissions use a different bit length than the session");

    // Own shares; bidders whose envelopes do not open are left out.
    std::map<Id, std::uint64_t> s_own, b_own, d_own;
    AgentShares forward;
    std::vector<auction::SellerTuple> sellers;
    std::vector<auction::BuyerTuple> buyers;
    for (const auto& s : subs.sellers) {
      try {
        s_own[s.id] = submission::open_seller(s, Role::Auctioneer, config.keys);
      } catch (const submission::EnvelopeError&) {
        res.excluded_bidders.push_back(s.id);
        continue;
      }
      forward.seller_s[s.id] = s.s_agent;
      sellers.push_back({s.id, 0, s.request_count, false});
    }
    for (const auto& b : subs.buyers) {
      try {
        const auto [bv, dv] = submission::open_buyer(b, Role::Auctioneer, config.keys);
        b_own[b.id] = bv;
        d_own[b.id] = dv;
      } catch (const submission::EnvelopeError&) {
        res.excluded_bidders.push_back(b.id);
        continue;
      }
      forward.buyer_bd[b.id] = {b.b_agent, b.d_agent};
      auction::BuyerTuple t;
      t.id = b.id;
      t.x = b.x;
      t.y = b.y;
      buyers.push_back(t);
    }
    std::sort(res.excluded_bidders.begin(), res.excluded_bidders.end());
    clock.lap("open_envelopes");

    PublicParams params;
    params.bit_length = config.bit_length;
    params.d_max = config.d_max;
    params.mode = config.mode;
    for (const auto& s : sellers) params.sellers.push_back({s.id, s.request_count});
    std::sort(params.sellers.begin(), params.sellers.end(), [](auto& a, auto& b) { return a.id < b.id; });
    const auto graph = auction::build_conflict_graph(buyers, config.radius_m);
    for (const auto& g : auction::form_groups(graph)) params.groups.push_back({g.group_id, g.members});
    clock.lap("grouping");

    link.send(FrameType::EncShares, shares_payload(forward));
    link.send(FrameType::Grouping, grouping_payload(params));
    const auto ours = handshake_payload(params);
    link.send(FrameType::Handshake, ours);
    check_handshake(ours, link.expect(FrameType::Handshake));
    clock.lap("handshake");

    const auto ac = oblivious::assemble_full_circuit(params);
    fill_circuit_metrics(m, ac);
    res.params = params;
    clock.lap("circuit");

    gc::Evaluator eval(ac.circuit);
    const auto garbler_buses = buses_of(ac.circuit, Party::Garbler);
    {
      const auto payload = link.expect(FrameType::InputLabels);
      Reader r(payload);
      std::array<Block, 2> consts{get_block(r), get_block(r)};
      eval.set_constants(consts);
      for (const auto* in : garbler_buses) {
        std::vector<Block> labels;
        for (std::size_t i = 0; i < in->bus.width(); ++i) labels.push_back(get_block(r));
        eval.set_bus(in->name, labels);
      }
      r.expect_done();
    }

    // Choice bits: own share bits for every evaluator bus.
    const auto own_buses = buses_of(ac.circuit, Party::Evaluator);
    std::vector<bool> choices;
    for (const auto* in : own_buses) {
      // Bus names are "<kind>/<id>/<field>/A".
      const auto first = in->name.find('/');
      const auto second = in->name.find('/', first + 1);
      const Id id = static_cast<Id>(std::stoul(in->name.substr(first + 1, second - first - 1)));
      const char field = in->name[second + 1];
      const std::uint64_t v = field == 's' ? s_own.at(id) : field == 'b' ? b_own.at(id) : d_own.at(id);
      for (std::size_t i = 0; i < in->bus.width(); ++i) choices.push_back(((v >> i) & 1u) != 0);
    }
    if (!choices.empty()) {
      auto prg = session_prg(config, "ppmcsa.session.ot_receiver");
      ot::OtReceiver receiver(prg, choices);
      link.send(FrameType::OtMsg, receiver.choose(link.expect(FrameType::OtMsg)));
      const auto labels = receiver.finish(link.expect(FrameType::OtMsg));
      std::size_t at = 0;
      for (const auto* in : own_buses) {
        eval.set_bus(in->name, std::span<const Block>(labels).subspan(at, in->bus.width()));
        at += in->bus.width();
      }
    }
    clock.lap("ot");

    while (m.tables_streamed < m.and_gates) {
      const auto payload = link.expect(FrameType::GarbledGates);
      if (payload.empty() || payload.size() % gc::kGateWireBytes != 0)
        throw SessionError("garbled gates: malformed frame");
      std::vector<gc::GarbledGate> tables;
      for (std::size_t at = 0; at < payload.size(); at += gc::kGateWireBytes)
        tables.push_back(gc::read_gate(std::span<const std::uint8_t>(payload).subspan(at, gc::kGateWireBytes)));
      m.tables_streamed += tables.size();
      if (m.tables_streamed > m.and_gates) throw SessionError("garbled gates: more tables than AND gates");
      eval.consume(tables);
    }
    eval.finish();
    m.garbled_table_bytes = m.tables_streamed * gc::kTableBytes;
    clock.lap("evaluate");

    const auto dec_bytes = link.expect(FrameType::Decoder);
    m.decoder_bytes = dec_bytes.size();
    const auto decoder = gc::OutputDecoder::parse(dec_bytes);
    m.decoder_buses = decoder.bus_count();
    if (decoder.bus_count() != ac.reveal.buses.size()) throw SessionError("decoder does not match the reveal plan");
    oblivious::Revealed revealed;
    for (const auto& name : ac.reveal.buses) revealed[name] = decoder.decode_value(name, eval.output_labels(name));
    res.outcome = oblivious::outcome_from_reveals(params, revealed);
    link.send(FrameType::Result, result_payload(ac, revealed));
    clock.lap("decode");

    m.traffic = link.stats();
    m.received_frames = link.received_types();
    return res;
  });
}

SessionResult run_agent(const SessionConfig& config, Channel& channel) {
  return guarded(channel, [&] {
    SessionResult res;
    RunMetrics& m = res.metrics;
    PhaseClock clock(m);
    FramedLink link(channel);

    const auto shares = parse_shares(link.expect(FrameType::EncShares));
    const PublicParams params = parse_grouping(link.expect(FrameType::Grouping), config);
    clock.lap("grouping");

    // Every forwarded envelope must open; the agent never evaluates on partial inputs.
    std::map<Id, std::uint64_t> s_own, b_own, d_own;
    try {
      for (const auto& [id, env] : shares.seller_s)
        s_own[id] = submission::open_share(env, id, submission::Field::RequestValue, config.keys);
      for (const auto& [id, bd] : shares.buyer_bd) {
        b_own[id] = submission::open_share(bd.first, id, submission::Field::BidValue, config.keys);
        d_own[id] = submission::open_share(bd.second, id, submission::Field::BidCount, config.keys);
      }
    } catch (const submission::EnvelopeError& e) {
      throw SessionError(std::string("agent envelope failed to open: ") + e.what());
    }
    std::set<Id> seller_ids, buyer_ids;
    for (const auto& s : params.sellers) seller_ids.insert(s.id);
    for (const auto& g : params.groups) buyer_ids.insert(g.members.begin(), g.members.end());
    if (seller_ids.size() != s_own.size() || buyer_ids.size() != b_own.size() ||
        !std::all_of(seller_ids.begin(), seller_ids.end(), [&](Id id) { return s_own.count(id) != 0; }) ||
        !std::all_of(buyer_ids.begin(), buyer_ids.end(), [&](Id id) { return b_own.count(id) != 0; }))
      throw SessionError("grouping does not match the forwarded envelopes");
    clock.lap("open_envelopes");

    const auto ours = handshake_payload(params);
    const auto theirs = link.expect(FrameType::Handshake);
    link.send(FrameType::Handshake, ours);
    check_handshake(ours, theirs);
    clock.lap("handshake");

    const auto ac = oblivious::assemble_full_circuit(params);
    fill_circuit_metrics(m, ac);
    res.params = params;
    clock.lap("circuit");

    gc::Garbler garbler(ac.circuit, session_prg(config, "ppmcsa.session.garbler"));
    {
      Writer w;
      for (const auto& b : garbler.constant_labels()) put_block(w, b);
      for (const auto* in : buses_of(ac.circuit, Party::Garbler)) {
        const auto first = in->name.find('/');
        const auto second = in->name.find('/', first + 1);
        const Id id = static_cast<Id>(std::stoul(in->name.substr(first + 1, second - first - 1)));
        const char field = in->name[second + 1];
        const std::uint64_t v = field == 's' ? s_own.at(id) : field == 'b' ? b_own.at(id) : d_own.at(id);
        const std::uint64_t mask = in->bus.width() >= 64 ? ~0ull : (1ull << in->bus.width()) - 1;
        for (const auto& b : garbler.encode(in->name, v & mask)) put_block(w, b);
      }
      link.send(FrameType::InputLabels, w.take());
    }

    std::vector<ot::OtSenderInput> pairs;
    for (const auto* in : buses_of(ac.circuit, Party::Evaluator))
      for (const auto& p : garbler.label_pairs(in->name)) pairs.push_back({p.label0, p.label1});
    if (!pairs.empty()) {
      auto prg = session_prg(config, "ppmcsa.session.ot_sender");
      ot::OtSender sender(prg);
      link.send(FrameType::OtMsg, sender.setup());
      link.send(FrameType::OtMsg, sender.respond(link.expect(FrameType::OtMsg), pairs));
    }
    clock.lap("ot");

    const std::size_t per_frame = std::max<std::size_t>(1, config.gates_per_frame);
    while (!garbler.done()) {
      const auto tables = garbler.garble_next(per_frame);
      if (tables.empty()) continue;
      std::vector<std::uint8_t> payload;
      payload.reserve(tables.size() * gc::kGateWireBytes);
      for (const auto& t : tables) gc::append_gate(payload, t);
      link.send(FrameType::GarbledGates, std::move(payload));
      m.tables_streamed += tables.size();
    }
    m.garbled_table_bytes = m.tables_streamed * gc::kTableBytes;
    clock.lap("garble");

    const auto decoder = garbler.decoder(ac.reveal.buses);
    auto dec_bytes = decoder.serialize();
    m.decoder_bytes = dec_bytes.size();
    m.decoder_buses = decoder.bus_count();
    link.send(FrameType::Decoder, std::move(dec_bytes));

    const auto revealed = parse_result(ac, link.expect(FrameType::Result));
    res.outcome = oblivious::outcome_from_reveals(params, revealed);
    clock.lap("decode");

    m.traffic = link.stats();
    m.received_frames = link.received_types();
    return res;
  });
}

TwoPartyResult run_pair(const submission::SealedSubmissions& subs, const SessionConfig& auctioneer,
                        const SessionConfig& agent, Channel& a_end,
                        Channel& b_end) {
  TwoPartyResult out;
  std::exception_ptr agent_error;
  std::thread agent_thread([&] {
    try {
      out.agent = run_agent(agent, b_end);
    } catch (...) {
      agent_error = std::current_exception();
    }
  });
  std::exception_ptr auctioneer_error;
  try {
    out.auctioneer = run_auctioneer(auctioneer, a_end, subs);
  } catch (...) {
    auctioneer_error = std::current_exception();
  }
  agent_thread.join();
  // A SessionError explains more than the peer's "disconnected".
  auto is_session_error = [](const std::exception_ptr& e) {
    try {
      std::rethrow_exception(e);
    } catch (const SessionError&) {
      return true;
    } catch (...) {
      return false;
    }
  };
  if (auctioneer_error && agent_error && !is_session_error(auctioneer_error) && is_session_error(agent_error))
    std::rethrow_exception(agent_error);
  if (auctioneer_error) std::rethrow_exception(auctioneer_error);
  if (agent_error) std::rethrow_exception(agent_error);
  return out;
}

namespace {

struct PairSetup {
  submission::SealedSubmissions subs;
  SessionConfig auctioneer;
  SessionConfig agent;
};

PairSetup make_setup(const auction::Scenario& scenario, const SessionOptions& options) {
  scenario.validate();
  PairSetup s;
  s.auctioneer.role = Role::Auctioneer;
  s.auctioneer.keys = submission::KeyPair::from_seed(options.seed, "auctioneer");
  s.agent.role = Role::Agent;
  s.agent.keys = submission::KeyPair::from_seed(options.seed, "agent");
  for (SessionConfig* c : {&s.auctioneer, &s.agent}) {
    c->bit_length = scenario.bit_length;
    c->d_max = scenario.d_max;
    c->radius_m = scenario.radius_m;
    c->mode = options.mode;
    c->seed = options.seed;
    c->gates_per_frame = options.gates_per_frame;
  }
  if (options.agent_bit_length) s.agent.bit_length = *options.agent_bit_length;
  if (options.agent_d_max) s.agent.d_max = *options.agent_d_max;
  s.subs = submission::seal_scenario(scenario, s.auctioneer.keys.public_key, s.agent.keys.public_key,
                                     options.seed);
  return s;
}

}  // namespace

TwoPartyResult loopback_session(const auction::Scenario& scenario, const SessionOptions& options) {
  const auto setup = make_setup(scenario, options);
  auto [a_end, b_end] = make_loopback_pair();
  return run_pair(setup.subs, setup.auctioneer, setup.agent, *a_end, *b_end);
}

TwoPartyResult tcp_session(const auction::Scenario& scenario, const SessionOptions& options) {
  const auto setup = make_setup(scenario, options);
  TcpListener listener(0);
  std::unique_ptr<Channel> b_end;
  std::thread connector([&] { b_end = tcp_connect("127.0.0.1", listener.port()); });
  auto a_end = listener.accept();
  connector.join();
  return run_pair(setup.subs, setup.auctioneer, setup.agent, *a_end, *b_end);
}

}  // namespace ppmcsa::protocol
