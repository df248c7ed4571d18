#pragma once

// Two-party session: the auctioneer groups buyers, forwards the agent's
// envelopes, obtains its own input labels by OT and evaluates; the agent
// garbles and streams tables. Frame order per role:
//
//   auctioneer -> agent : ENC_SHARES, GROUPING, HANDSHAKE
//   agent -> auctioneer : HANDSHAKE, INPUT_LABELS, OT_MSG(setup)
//   auctioneer -> agent : OT_MSG(choices)
//   agent -> auctioneer : OT_MSG(response), GARBLED_GATES x n, DECODER
//   auctioneer -> agent : RESULT

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppmcsa/auction_core.hpp"
#include "ppmcsa/oblivious_auction.hpp"
#include "ppmcsa/submission.hpp"
#include "ppmcsa/transport.hpp"

namespace ppmcsa::protocol {

inline constexpr std::uint8_t kProtocolVersion = 1;

using submission::Role;

struct SessionConfig {
  Role role = Role::Auctioneer;
  unsigned bit_length = 16;
  std::uint32_t d_max = 10;
  double radius_m = 400.0;
  oblivious::Mode mode = oblivious::Mode::Improved;
  submission::KeyPair keys;
  std::optional<std::uint64_t> seed;  // unset: OS randomness
  std::size_t gates_per_frame = 4096;
};

struct RunMetrics {
  TrafficStats traffic;
  std::map<std::string, double> phase_ms;
  std::size_t and_gates = 0;
  std::size_t ot_count = 0;
  std::size_t tables_streamed = 0;
  std::size_t garbled_table_bytes = 0;
  std::size_t decoder_bytes = 0;
  std::size_t decoder_buses = 0;
  std::size_t reveal_buses = 0;
  std::array<std::uint8_t, 32> circuit_hash{};
  std::array<std::uint8_t, 32> params_hash{};
  std::vector<FrameType> received_frames;

  std::uint64_t total_bytes() const { return traffic.total_sent() + traffic.total_received(); }
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionResult {
  auction::AuctionOutcome outcome;
  RunMetrics metrics;
  std::vector<auction::Id> excluded_bidders;  // envelopes that failed to open
  oblivious::PublicParams params;
};

SessionResult run_auctioneer(const SessionConfig& config, Channel& channel,
                             const submission::SealedSubmissions& submissions);
SessionResult run_agent(const SessionConfig& config, Channel& channel);

struct TwoPartyResult {
  SessionResult auctioneer;
  SessionResult agent;
};

struct SessionOptions {
  oblivious::Mode mode = oblivious::Mode::Improved;
  std::uint64_t seed = 1;
  std::size_t gates_per_frame = 4096;
  // Overrides for the agent's configuration (handshake tests).
  std::optional<unsigned> agent_bit_length;
  std::optional<std::uint32_t> agent_d_max;
};

// Seals the scenario with per-seed keys and runs both roles in-process.
TwoPartyResult loopback_session(const auction::Scenario& scenario, const SessionOptions& options);
// Same, over a TCP connection on 127.0.0.1.
TwoPartyResult tcp_session(const auction::Scenario& scenario, const SessionOptions& options);
// Both roles over an arbitrary connected channel pair.
TwoPartyResult run_pair(const submission::SealedSubmissions& subs, const SessionConfig& auctioneer,
                        const SessionConfig& agent, Channel& a_end,
                        Channel& b_end);

}  // namespace ppmcsa::protocol
