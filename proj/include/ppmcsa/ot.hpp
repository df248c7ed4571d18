#pragma once

// Semi-honest 1-out-of-2 oblivious transfer over ristretto255
// (Chou-Orlandi "simplest OT"). One sender key serves a whole batch.
//
//   sender   -> receiver : A = aG                         (32 bytes)
//   receiver -> sender   : B_i = b_i G  or  A + b_i G     (32 bytes each)
//   sender   -> receiver : x0 ^ H(i, A, B_i, aB_i),
//                          x1 ^ H(i, A, B_i, a(B_i - A))  (32 bytes each)

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ppmcsa/crypto.hpp"

namespace ppmcsa::ot {

using crypto::Block;

inline constexpr std::size_t kPointBytes = 32;
inline constexpr std::size_t kResponseBytes = 2 * crypto::kBlockBytes;

class OtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OtSenderInput {
  Block x0;
  Block x1;
};

struct OtReceiverInput {
  bool choice = false;
};

class OtSender {
 public:
  explicit OtSender(crypto::Prg& prg);

  std::vector<std::uint8_t> setup();
  std::vector<std::uint8_t> respond(std::span<const std::uint8_t> receiver_message,
                                    std::span<const OtSenderInput> inputs);

 private:
  enum class State { Fresh, SetupSent, Done } state_ = State::Fresh;
  crypto::Prg& prg_;
  std::array<std::uint8_t, 32> a_{};
  std::array<std::uint8_t, 32> big_a_{};
  std::array<std::uint8_t, 32> a_times_a_{};
};

class OtReceiver {
 public:
  OtReceiver(crypto::Prg& prg, std::vector<bool> choices);

  std::vector<std::uint8_t> choose(std::span<const std::uint8_t> sender_setup);
  std::vector<Block> finish(std::span<const std::uint8_t> sender_response);

 private:
  enum class State { Fresh, ChoiceSent, Done } state_ = State::Fresh;
  crypto::Prg& prg_;
  std::vector<bool> choices_;
  std::array<std::uint8_t, 32> big_a_{};
  std::vector<std::array<std::uint8_t, 32>> big_b_;
  std::vector<std::array<std::uint8_t, 32>> keys_;
};

// Sizes of the three messages of one run, in order.
struct Transcript {
  std::vector<std::size_t> message_bytes;
  std::size_t total() const;
};

// In-process runs of the three-message protocol. n = 0 is rejected.
std::vector<Block> ot_batch(std::span<const OtSenderInput> inputs, const std::vector<bool>& choices,
                            std::uint64_t seed, Transcript* transcript = nullptr);
Block ot_exchange(const OtSenderInput& sender, const OtReceiverInput& receiver, std::uint64_t seed,
                  Transcript* transcript = nullptr);

}  // namespace ppmcsa::ot
