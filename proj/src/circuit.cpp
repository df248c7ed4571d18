#include "ppmcsa/circuit.hpp"

#include <set>
#include <sstream>

#include "ppmcsa/crypto.hpp"

namespace ppmcsa::circuit {

Circuit::Circuit() {
  gates_.push_back({GateKind::Const0, 0, 0});
  gates_.push_back({GateKind::Const1, 0, 0});
}

Wire Circuit::push(GateKind kind, Wire a, Wire b) {
  if (gates_.size() >= UINT32_MAX) throw CircuitError("circuit exceeds 2^32 wires");
  gates_.push_back({kind, a, b});
  return static_cast<Wire>(gates_.size() - 1);
}

void Circuit::check_wire(Wire w) const {
  if (w >= gates_.size()) throw CircuitError("gate input references an undriven wire");
}

Bus Circuit::add_input(const std::string& name, Party owner, std::size_t width) {
  if (width == 0) throw CircuitError("input bus '" + name + "' has zero width");
  if (input_index_.count(name)) throw CircuitError("duplicate input bus '" + name + "'");
  Bus bus;
  bus.wires.reserve(width);
  for (std::size_t i = 0; i < width; ++i) bus.wires.push_back(push(GateKind::Input, 0, 0));
  input_index_[name] = inputs_.size();
  inputs_.push_back({name, owner, bus});
  return bus;
}

void Circuit::add_output(const std::string& name, const Bus& bus) {
  if (bus.width() == 0) throw CircuitError("output bus '" + name + "' has zero width");
  if (output_index_.count(name)) throw CircuitError("duplicate output bus '" + name + "'");
  for (Wire w : bus.wires) check_wire(w);
  output_index_[name] = outputs_.size();
  outputs_.push_back({name, bus});
}

Wire Circuit::xor_gate(Wire a, Wire b) {
  check_wire(a);
  check_wire(b);
  if (a == b) return kZero;
  if (a == kZero) return b;
  if (b == kZero) return a;
  ++xor_count_;
  return push(GateKind::Xor, a, b);
}

Wire Circuit::and_gate(Wire a, Wire b) {
  check_wire(a);
  check_wire(b);
  if (a == kZero || b == kZero) return kZero;
  if (a == kOne) return b;
  if (b == kOne) return a;
  if (a == b) return a;
  ++and_count_;
  return push(GateKind::And, a, b);
}

Wire Circuit::or_gate(Wire a, Wire b) { return xor_gate(xor_gate(a, b), and_gate(a, b)); }

Bus Circuit::constant(std::uint64_t value, std::size_t width) const {
  Bus bus;
  bus.wires.reserve(width);
  for (std::size_t i = 0; i < width; ++i)
    bus.wires.push_back(i < 64 && ((value >> i) & 1u) ? kOne : kZero);
  return bus;
}

const InputBus& Circuit::input(const std::string& name) const {
  const auto it = input_index_.find(name);
  if (it == input_index_.end()) throw CircuitError("no input bus '" + name + "'");
  return inputs_[it->second];
}

const OutputBus& Circuit::output(const std::string& name) const {
  const auto it = output_index_.find(name);
  if (it == output_index_.end()) throw CircuitError("no output bus '" + name + "'");
  return outputs_[it->second];
}

std::size_t Circuit::input_bits(Party owner) const {
  std::size_t n = 0;
  for (const auto& in : inputs_)
    if (in.owner == owner) n += in.bus.width();
  return n;
}

namespace {

std::vector<std::uint8_t> run(const std::vector<Gate>& gates, std::vector<std::uint8_t> values) {
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Gate& g = gates[i];
    switch (g.kind) {
      case GateKind::Input: break;
      case GateKind::Const0: values[i] = 0; break;
      case GateKind::Const1: values[i] = 1; break;
      case GateKind::Xor: values[i] = values[g.a] ^ values[g.b]; break;
      case GateKind::And: values[i] = values[g.a] & values[g.b]; break;
    }
  }
  return values;
}

}  // namespace

std::vector<std::uint8_t> Circuit::evaluate(const InputAssignment& assignment) const {
  std::vector<std::uint8_t> values(gates_.size(), 0);
  std::set<std::string> used;
  for (const auto& in : inputs_) {
    const auto it = assignment.find(in.name);
    if (it == assignment.end()) throw CircuitError("input bus '" + in.name + "' is unassigned");
    used.insert(in.name);
    for (std::size_t i = 0; i < in.bus.width(); ++i)
      values[in.bus[i]] = i < 64 ? static_cast<std::uint8_t>((it->second >> i) & 1u) : 0;
  }
  if (used.size() != assignment.size()) throw CircuitError("assignment names an unknown input bus");
  return run(gates_, std::move(values));
}

std::vector<std::uint8_t> Circuit::evaluate_bits(
    const std::map<std::string, std::vector<bool>>& bits) const {
  std::vector<std::uint8_t> values(gates_.size(), 0);
  for (const auto& in : inputs_) {
    const auto it = bits.find(in.name);
    if (it == bits.end()) throw CircuitError("input bus '" + in.name + "' is unassigned");
    if (it->second.size() != in.bus.width())
      throw CircuitError("input bus '" + in.name + "' width mismatch");
    for (std::size_t i = 0; i < in.bus.width(); ++i) values[in.bus[i]] = it->second[i];
  }
  if (bits.size() != inputs_.size()) throw CircuitError("assignment names an unknown input bus");
  return run(gates_, std::move(values));
}

std::uint64_t Circuit::read(const std::vector<std::uint8_t>& values, const Bus& bus) {
  if (bus.width() > 64) throw CircuitError("bus wider than 64 bits");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bus.width(); ++i) v |= std::uint64_t{values[bus[i]]} << i;
  return v;
}

std::array<std::uint8_t, 32> Circuit::hash() const {
  crypto::Hasher h;
  h.update_u64(gates_.size());
  std::vector<std::uint8_t> buf;
  buf.reserve(9 * 4096);
  for (const Gate& g : gates_) {
    buf.push_back(static_cast<std::uint8_t>(g.kind));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(g.a >> (8 * i)));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(g.b >> (8 * i)));
    if (buf.size() >= 9 * 4096) {
      h.update(buf);
      buf.clear();
    }
  }
  h.update(buf);
  const auto put_bus = [&](const std::string& name, const Bus& bus) {
    h.update({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()});
    h.update_u64(bus.width());
    for (Wire w : bus.wires) h.update_u64(w);
  };
  for (const auto& in : inputs_) {
    h.update_u64(static_cast<std::uint64_t>(in.owner));
    put_bus(in.name, in.bus);
  }
  for (const auto& out : outputs_) put_bus(out.name, out.bus);
  return h.finish();
}

std::string Circuit::dump() const {
  static const char* kNames[] = {"INPUT", "CONST0", "CONST1", "XOR", "AND"};
  std::ostringstream os;
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const Gate& g = gates_[i];
    os << i << ' ' << kNames[static_cast<int>(g.kind)];
    if (g.kind == GateKind::Xor || g.kind == GateKind::And) os << ' ' << g.a << ' ' << g.b;
    os << '\n';
  }
  for (const auto& in : inputs_) {
    os << "# input " << in.name << (in.owner == Party::Garbler ? " garbler" : " evaluator");
    for (Wire w : in.bus.wires) os << ' ' << w;
    os << '\n';
  }
  for (const auto& out : outputs_) {
    os << "# output " << out.name;
    for (Wire w : out.bus.wires) os << ' ' << w;
    os << '\n';
  }
  return os.str();
}

}  // namespace ppmcsa::circuit
