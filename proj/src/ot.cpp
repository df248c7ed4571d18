#include "ppmcsa/ot.hpp"

#include <sodium.h>

#include <cstring>
#include <numeric>

namespace ppmcsa::ot {

namespace {

using Point = std::array<std::uint8_t, 32>;

Point random_scalar(crypto::Prg& prg) {
  std::array<std::uint8_t, 64> wide{};
  prg.fill(wide);
  Point s{};
  crypto_core_ristretto255_scalar_reduce(s.data(), wide.data());
  return s;
}

Block derive_key(std::size_t index, const Point& a, const Point& b, const Point& shared) {
  crypto::Hasher h;
  h.update_u64(index).update(a).update(b).update(shared);
  const auto d = h.finish();
  return Block::from_bytes(std::span<const std::uint8_t>(d.data(), 16));
}

Point read_point(std::span<const std::uint8_t> bytes, std::size_t at) {
  if (at + kPointBytes > bytes.size()) throw OtError("truncated OT message");
  Point p{};
  std::memcpy(p.data(), bytes.data() + at, kPointBytes);
  if (crypto_core_ristretto255_is_valid_point(p.data()) != 1) throw OtError("malformed group element");
  return p;
}

}  // namespace

std::size_t Transcript::total() const {
  return std::accumulate(message_bytes.begin(), message_bytes.end(), std::size_t{0});
}

OtSender::OtSender(crypto::Prg& prg) : prg_(prg) { crypto::ensure_sodium(); }

std::vector<std::uint8_t> OtSender::setup() {
  if (state_ != State::Fresh) throw OtError("OT sender setup called twice");
  do {
    a_ = random_scalar(prg_);
  } while (crypto_scalarmult_ristretto255_base(big_a_.data(), a_.data()) != 0);
  if (crypto_scalarmult_ristretto255(a_times_a_.data(), a_.data(), big_a_.data()) != 0)
    throw OtError("degenerate sender key");
  state_ = State::SetupSent;
  return {big_a_.begin(), big_a_.end()};
}

std::vector<std::uint8_t> OtSender::respond(std::span<const std::uint8_t> receiver_message,
                                            std::span<const OtSenderInput> inputs) {
  if (state_ != State::SetupSent) throw OtError("OT sender responded out of order");
  if (inputs.empty()) throw OtError("OT batch must not be empty");
  if (receiver_message.size() != inputs.size() * kPointBytes) throw OtError("OT choice message has wrong size");
  std::vector<std::uint8_t> out;
  out.reserve(inputs.size() * kResponseBytes);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Point b = read_point(receiver_message, i * kPointBytes);
    Point k0{}, k1{};
    if (crypto_scalarmult_ristretto255(k0.data(), a_.data(), b.data()) != 0)
      throw OtError("malformed group element");
    crypto_core_ristretto255_sub(k1.data(), k0.data(), a_times_a_.data());
    const Block e0 = inputs[i].x0 ^ derive_key(i, big_a_, b, k0);
    const Block e1 = inputs[i].x1 ^ derive_key(i, big_a_, b, k1);
    const auto b0 = e0.to_bytes();
    const auto b1 = e1.to_bytes();
    out.insert(out.end(), b0.begin(), b0.end());
    out.insert(out.end(), b1.begin(), b1.end());
  }
  state_ = State::Done;
  return out;
}

OtReceiver::OtReceiver(crypto::Prg& prg, std::vector<bool> choices)
    : prg_(prg), choices_(std::move(choices)) {
  crypto::ensure_sodium();
  if (choices_.empty()) throw OtError("OT batch must not be empty");
}

std::vector<std::uint8_t> OtReceiver::choose(std::span<const std::uint8_t> sender_setup) {
  if (state_ != State::Fresh) throw OtError("OT receiver chose twice");
  if (sender_setup.size() != kPointBytes) throw OtError("OT setup message has wrong size");
  big_a_ = read_point(sender_setup, 0);
  std::vector<std::uint8_t> out;
  out.reserve(choices_.size() * kPointBytes);
  big_b_.resize(choices_.size());
  keys_.resize(choices_.size());
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    Point b{}, bg{};
    do {
      b = random_scalar(prg_);
    } while (crypto_scalarmult_ristretto255_base(bg.data(), b.data()) != 0);
    if (choices_[i]) {
      crypto_core_ristretto255_add(big_b_[i].data(), big_a_.data(), bg.data());
    } else {
      big_b_[i] = bg;
    }
    if (crypto_scalarmult_ristretto255(keys_[i].data(), b.data(), big_a_.data()) != 0)
      throw OtError("malformed group element");
    out.insert(out.end(), big_b_[i].begin(), big_b_[i].end());
  }
  state_ = State::ChoiceSent;
  return out;
}

std::vector<Block> OtReceiver::finish(std::span<const std::uint8_t> sender_response) {
  if (state_ != State::ChoiceSent) throw OtError("OT receiver finished out of order");
  if (sender_response.size() != choices_.size() * kResponseBytes) throw OtError("OT response has wrong size");
  std::vector<Block> out;
  out.reserve(choices_.size());
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    const std::size_t at = i * kResponseBytes + (choices_[i] ? crypto::kBlockBytes : 0);
    const Block e = Block::from_bytes(sender_response.subspan(at, crypto::kBlockBytes));
    out.push_back(e ^ derive_key(i, big_a_, big_b_[i], keys_[i]));
  }
  state_ = State::Done;
  return out;
}

std::vector<Block> ot_batch(std::span<const OtSenderInput> inputs, const std::vector<bool>& choices,
                            std::uint64_t seed, Transcript* transcript) {
  if (inputs.empty() || choices.empty()) throw OtError("OT batch must not be empty");
  if (inputs.size() != choices.size()) throw OtError("OT batch size mismatch");
  crypto::Prg sender_prg(seed, "ppmcsa.ot.sender");
  crypto::Prg receiver_prg(seed, "ppmcsa.ot.receiver");
  OtSender sender(sender_prg);
  OtReceiver receiver(receiver_prg, choices);
  const auto m1 = sender.setup();
  const auto m2 = receiver.choose(m1);
  const auto m3 = sender.respond(m2, inputs);
  if (transcript) transcript->message_bytes = {m1.size(), m2.size(), m3.size()};
  return receiver.finish(m3);
}

Block ot_exchange(const OtSenderInput& sender, const OtReceiverInput& receiver, std::uint64_t seed,
                  Transcript* transcript) {
  return ot_batch(std::span<const OtSenderInput>(&sender, 1), {receiver.choice}, seed, transcript).front();
}

}  // namespace ppmcsa::ot
