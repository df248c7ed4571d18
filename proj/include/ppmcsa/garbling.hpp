#pragma once

// Yao garbling with free-XOR and point-and-permute. kappa = 128.
// The agent garbles, the auctioneer evaluates.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppmcsa/circuit.hpp"
#include "ppmcsa/crypto.hpp"

namespace ppmcsa::gc {

using crypto::Block;
using circuit::Circuit;
using circuit::Wire;

inline constexpr std::size_t kLabelBytes = 16;
inline constexpr std::size_t kTableBytes = 4 * kLabelBytes;
// 32-bit gate index followed by the four rows.
inline constexpr std::size_t kGateWireBytes = 4 + kTableBytes;
inline constexpr std::size_t kDecoderEntryBytes = 16;

class GarbleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WireLabelPair {
  Block label0;
  Block label1;  // label0 ^ delta
};

// Rows ordered by the colour bits (colour_a, colour_b) of the input labels.
struct GarbledGate {
  std::uint32_t index = 0;
  std::array<Block, 4> rows{};
  bool operator==(const GarbledGate&) const = default;
};

void append_gate(std::vector<std::uint8_t>& out, const GarbledGate& gate);
GarbledGate read_gate(std::span<const std::uint8_t> bytes);

// Per revealed bus, one (tag0, tag1) pair per wire. Only buses listed here decode.
class OutputDecoder {
 public:
  struct Entry {
    std::uint64_t tag0 = 0;
    std::uint64_t tag1 = 0;
  };

  void add_bus(const std::string& name, std::vector<Entry> entries);
  bool covers(const std::string& name) const;
  std::size_t bus_count() const { return buses_.size(); }
  std::size_t wire_count() const;
  const std::vector<std::pair<std::string, std::vector<Entry>>>& buses() const { return buses_; }

  // Throws GarbleError for undesignated buses or labels that match neither tag.
  std::vector<bool> decode(const std::string& name, std::span<const Block> labels) const;
  std::uint64_t decode_value(const std::string& name, std::span<const Block> labels) const;

  std::vector<std::uint8_t> serialize() const;
  static OutputDecoder parse(std::span<const std::uint8_t> bytes);

 private:
  std::vector<std::pair<std::string, std::vector<Entry>>> buses_;
};

std::uint64_t output_tag(const Block& label, Wire wire);

// Streaming garbler: labels for every input and constant wire are fixed at
// construction; garble_next() emits tables in topological order.
class Garbler {
 public:
  Garbler(const Circuit& circuit, std::uint64_t seed);
  Garbler(const Circuit& circuit, crypto::Prg prg);

  const Block& delta() const { return delta_; }
  WireLabelPair pair(Wire w) const { return {label0_[w], label0_[w] ^ delta_}; }

  // Labels encoding `value` on the named bus.
  std::vector<Block> encode(const std::string& bus, std::uint64_t value) const;
  std::vector<Block> encode_bits(const std::string& bus, const std::vector<bool>& bits) const;
  std::vector<WireLabelPair> label_pairs(const std::string& bus) const;
  // Active labels for the constant-zero and constant-one wires.
  std::array<Block, 2> constant_labels() const;

  bool done() const { return next_ == circuit_.wire_count(); }
  std::vector<GarbledGate> garble_next(std::size_t max_tables);

  OutputDecoder decoder(const std::vector<std::string>& reveal) const;

 private:
  const Circuit& circuit_;
  crypto::Prg prg_;
  Block delta_;
  std::vector<Block> label0_;
  std::size_t next_ = 0;
};

class Evaluator {
 public:
  explicit Evaluator(const Circuit& circuit);

  void set_bus(const std::string& bus, std::span<const Block> labels);
  void set_constants(const std::array<Block, 2>& labels);

  // Evaluates as far as the supplied tables allow. Tables must arrive in gate order.
  void consume(std::span<const GarbledGate> tables);
  // Evaluates any trailing XOR gates; throws if tables are still outstanding.
  void finish();
  bool done() const { return next_ == circuit_.wire_count(); }

  std::vector<Block> labels(const circuit::Bus& bus) const;
  std::vector<Block> output_labels(const std::string& name) const;

 private:
  void check_inputs();

  const Circuit& circuit_;
  std::vector<Block> active_;
  std::vector<std::uint8_t> assigned_;
  bool inputs_checked_ = false;
  std::size_t next_ = 0;
};

// Whole-circuit convenience wrappers.
struct GarbledCircuit {
  std::vector<GarbledGate> gates;
  std::size_t table_bytes() const { return gates.size() * kTableBytes; }
};

struct GarbleResult {
  GarbledCircuit garbled;
  OutputDecoder decoder;
  std::map<std::string, std::vector<WireLabelPair>> encoding;  // every input bus
  std::array<Block, 2> constants{};
};

GarbleResult garble(const Circuit& circuit, std::uint64_t seed, const std::vector<std::string>& reveal);

// Labels for `value` on `bus` under an encoding table.
std::vector<Block> encode_inputs(const GarbleResult& garbled, const std::string& bus,
                                 std::uint64_t value);

// Returns output labels for every output bus of the circuit.
std::map<std::string, std::vector<Block>> evaluate(
    const Circuit& circuit, const GarbledCircuit& garbled,
    const std::map<std::string, std::vector<Block>>& input_labels, const std::array<Block, 2>& constants);

}  // namespace ppmcsa::gc
