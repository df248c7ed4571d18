#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppmcsa::circuit {

using Wire = std::uint32_t;

// Every wire is driven by exactly one gate; the wire id is the gate's index.
enum class GateKind : std::uint8_t { Input = 0, Const0 = 1, Const1 = 2, Xor = 3, And = 4 };

struct Gate {
  GateKind kind;
  Wire a;
  Wire b;
};

// Ordered wires, least significant bit first.
struct Bus {
  std::vector<Wire> wires;

  std::size_t width() const { return wires.size(); }
  Wire operator[](std::size_t i) const { return wires[i]; }
  Wire msb() const { return wires.back(); }
  bool operator==(const Bus&) const = default;
};

enum class Party : std::uint8_t { Garbler = 0, Evaluator = 1 };

struct InputBus {
  std::string name;
  Party owner;
  Bus bus;
};

struct OutputBus {
  std::string name;
  Bus bus;
};

class CircuitError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using InputAssignment = std::map<std::string, std::uint64_t>;

class Circuit {
 public:
  static constexpr Wire kZero = 0;
  static constexpr Wire kOne = 1;

  Circuit();

  Bus add_input(const std::string& name, Party owner, std::size_t width);
  void add_output(const std::string& name, const Bus& bus);

  // Constant-folding gate constructors. NOT is XOR with the constant-one wire.
  Wire xor_gate(Wire a, Wire b);
  Wire and_gate(Wire a, Wire b);
  Wire not_gate(Wire a) { return xor_gate(a, kOne); }
  Wire or_gate(Wire a, Wire b);

  Bus constant(std::uint64_t value, std::size_t width) const;
  bool is_constant(Wire w) const { return w == kZero || w == kOne; }

  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t wire_count() const { return gates_.size(); }
  std::size_t and_count() const { return and_count_; }
  std::size_t xor_count() const { return xor_count_; }

  const std::vector<InputBus>& inputs() const { return inputs_; }
  const std::vector<OutputBus>& outputs() const { return outputs_; }
  const InputBus& input(const std::string& name) const;
  const OutputBus& output(const std::string& name) const;
  std::size_t input_bits(Party owner) const;

  // Plain evaluation; returns the value of every wire. Every input bus must be assigned.
  std::vector<std::uint8_t> evaluate(const InputAssignment& assignment) const;
  std::vector<std::uint8_t> evaluate_bits(const std::map<std::string, std::vector<bool>>& bits) const;
  static std::uint64_t read(const std::vector<std::uint8_t>& values, const Bus& bus);

  // BLAKE2b over gates and bus declarations; equal iff the topology is equal.
  std::array<std::uint8_t, 32> hash() const;

  // One gate per line: "<index> <KIND> <a> <b>".
  std::string dump() const;

 private:
  Wire push(GateKind kind, Wire a, Wire b);
  void check_wire(Wire w) const;

  std::vector<Gate> gates_;
  std::vector<InputBus> inputs_;
  std::vector<OutputBus> outputs_;
  std::map<std::string, std::size_t> input_index_;
  std::map<std::string, std::size_t> output_index_;
  std::size_t and_count_ = 0;
  std::size_t xor_count_ = 0;
};

}  // namespace ppmcsa::circuit
