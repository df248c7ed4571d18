#include "ppmcsa/garbling.hpp"

#include <sodium.h>

#include <cstring>

namespace ppmcsa::gc {

using circuit::GateKind;

namespace {

// Row key: BLAKE2b-128(label_a || label_b || gate index), tweaked per gate.
Block gate_hash(const Block& a, const Block& b, std::uint32_t gate) {
  std::array<std::uint8_t, 36> in{};
  const auto ab = a.to_bytes();
  const auto bb = b.to_bytes();
  std::memcpy(in.data(), ab.data(), 16);
  std::memcpy(in.data() + 16, bb.data(), 16);
  for (int i = 0; i < 4; ++i) in[32 + i] = static_cast<std::uint8_t>(gate >> (8 * i));
  std::array<std::uint8_t, 16> out{};
  crypto_generichash(out.data(), out.size(), in.data(), in.size(), nullptr, 0);
  return Block::from_bytes(out);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  if (at + 4 > in.size()) throw GarbleError("truncated field");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in[at + i];
  return v;
}

}  // namespace

std::uint64_t output_tag(const Block& label, Wire wire) {
  std::array<std::uint8_t, 24> in{};
  const auto lb = label.to_bytes();
  std::memcpy(in.data(), lb.data(), 16);
  std::memcpy(in.data() + 16, "out", 3);
  for (int i = 0; i < 4; ++i) in[20 + i] = static_cast<std::uint8_t>(wire >> (8 * i));
  std::array<std::uint8_t, 8> out{};
  crypto_generichash(out.data(), out.size(), in.data(), in.size(), nullptr, 0);
  std::uint64_t tag = 0;
  for (int i = 0; i < 8; ++i) tag |= std::uint64_t{out[i]} << (8 * i);
  return tag;
}

void append_gate(std::vector<std::uint8_t>& out, const GarbledGate& gate) {
  put_u32(out, gate.index);
  for (const Block& row : gate.rows) {
    const auto bytes = row.to_bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
}

GarbledGate read_gate(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGateWireBytes) throw GarbleError("truncated garbled gate");
  GarbledGate g;
  g.index = get_u32(bytes, 0);
  for (std::size_t r = 0; r < 4; ++r) g.rows[r] = Block::from_bytes(bytes.subspan(4 + 16 * r, 16));
  return g;
}

// --- decoder ---------------------------------------------------------------

void OutputDecoder::add_bus(const std::string& name, std::vector<Entry> entries) {
  if (covers(name)) throw GarbleError("bus '" + name + "' already in decoder");
  buses_.emplace_back(name, std::move(entries));
}

bool OutputDecoder::covers(const std::string& name) const {
  for (const auto& [n, _] : buses_)
    if (n == name) return true;
  return false;
}

std::size_t OutputDecoder::wire_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : buses_) n += e.size();
  return n;
}

std::vector<bool> OutputDecoder::decode(const std::string& name, std::span<const Block> labels) const {
  for (const auto& [n, entries] : buses_) {
    if (n != name) continue;
    if (labels.size() != entries.size()) throw GarbleError("label count mismatch for '" + name + "'");
    std::vector<bool> bits(entries.size());
    // Tags are bound to the wire position inside the bus via the hash input.
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::uint64_t t = output_tag(labels[i], static_cast<Wire>(i));
      if (t == entries[i].tag0) {
        bits[i] = false;
      } else if (t == entries[i].tag1) {
        bits[i] = true;
      } else {
        throw GarbleError("authenticity failure decoding '" + name + "'");
      }
    }
    return bits;
  }
  throw GarbleError("bus '" + name + "' is not designated for reveal");
}

std::uint64_t OutputDecoder::decode_value(const std::string& name, std::span<const Block> labels) const {
  const auto bits = decode(name, labels);
  if (bits.size() > 64) throw GarbleError("bus too wide for an integer");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) v |= std::uint64_t{bits[i]} << i;
  return v;
}

std::vector<std::uint8_t> OutputDecoder::serialize() const {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(buses_.size()));
  for (const auto& [name, entries] : buses_) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(e.tag0 >> (8 * i)));
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(e.tag1 >> (8 * i)));
    }
  }
  return out;
}

OutputDecoder OutputDecoder::parse(std::span<const std::uint8_t> bytes) {
  OutputDecoder d;
  std::size_t at = 0;
  const std::uint32_t count = get_u32(bytes, at);
  at += 4;
  for (std::uint32_t b = 0; b < count; ++b) {
    const std::uint32_t len = get_u32(bytes, at);
    at += 4;
    if (at + len > bytes.size()) throw GarbleError("truncated decoder");
    std::string name(bytes.begin() + at, bytes.begin() + at + len);
    at += len;
    const std::uint32_t n = get_u32(bytes, at);
    at += 4;
    if (at + std::size_t{n} * kDecoderEntryBytes > bytes.size()) throw GarbleError("truncated decoder");
    std::vector<Entry> entries(n);
    for (auto& e : entries) {
      for (int i = 0; i < 8; ++i) e.tag0 |= std::uint64_t{bytes[at + i]} << (8 * i);
      for (int i = 0; i < 8; ++i) e.tag1 |= std::uint64_t{bytes[at + 8 + i]} << (8 * i);
      at += kDecoderEntryBytes;
    }
    d.add_bus(name, std::move(entries));
  }
  if (at != bytes.size()) throw GarbleError("trailing bytes after decoder");
  return d;
}

// --- garbler ---------------------------------------------------------------

Garbler::Garbler(const Circuit& circuit, std::uint64_t seed)
    : Garbler(circuit, crypto::Prg(seed, "ppmcsa.garbler")) {}

Garbler::Garbler(const Circuit& circuit, crypto::Prg prg)
    : circuit_(circuit), prg_(std::move(prg)), label0_(circuit.wire_count()) {
  delta_ = prg_.next_block();
  delta_.lo |= 1u;
  const auto& gates = circuit_.gates();
  for (std::size_t w = 0; w < gates.size(); ++w) {
    const GateKind k = gates[w].kind;
    if (k == GateKind::Input || k == GateKind::Const0 || k == GateKind::Const1) label0_[w] = prg_.next_block();
  }
}

std::vector<Block> Garbler::encode(const std::string& bus, std::uint64_t value) const {
  const auto& in = circuit_.input(bus);
  std::vector<bool> bits(in.bus.width());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = i < 64 && ((value >> i) & 1u);
  return encode_bits(bus, bits);
}

std::vector<Block> Garbler::encode_bits(const std::string& bus, const std::vector<bool>& bits) const {
  const auto& in = circuit_.input(bus);
  if (bits.size() != in.bus.width()) throw GarbleError("bit count mismatch for '" + bus + "'");
  std::vector<Block> out;
  out.reserve(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i)
    out.push_back(bits[i] ? label0_[in.bus[i]] ^ delta_ : label0_[in.bus[i]]);
  return out;
}

std::vector<WireLabelPair> Garbler::label_pairs(const std::string& bus) const {
  const auto& in = circuit_.input(bus);
  std::vector<WireLabelPair> out;
  out.reserve(in.bus.width());
  for (Wire w : in.bus.wires) out.push_back(pair(w));
  return out;
}

std::array<Block, 2> Garbler::constant_labels() const {
  return {label0_[Circuit::kZero], label0_[Circuit::kOne] ^ delta_};
}

std::vector<GarbledGate> Garbler::garble_next(std::size_t max_tables) {
  std::vector<GarbledGate> out;
  const auto& gates = circuit_.gates();
  while (next_ < gates.size() && out.size() < max_tables) {
    const auto& g = gates[next_];
    if (g.kind == GateKind::Xor) {
      label0_[next_] = label0_[g.a] ^ label0_[g.b];
    } else if (g.kind == GateKind::And) {
      const Block out0 = prg_.next_block();
      label0_[next_] = out0;
      GarbledGate gg;
      gg.index = static_cast<std::uint32_t>(next_);
      for (int va = 0; va < 2; ++va) {
        for (int vb = 0; vb < 2; ++vb) {
          const Block a = va ? label0_[g.a] ^ delta_ : label0_[g.a];
          const Block b = vb ? label0_[g.b] ^ delta_ : label0_[g.b];
          const Block c = (va & vb) ? out0 ^ delta_ : out0;
          const int row = (a.lsb() ? 2 : 0) | (b.lsb() ? 1 : 0);
          gg.rows[row] = gate_hash(a, b, gg.index) ^ c;
        }
      }
      out.push_back(gg);
    }
    ++next_;
  }
  return out;
}

OutputDecoder Garbler::decoder(const std::vector<std::string>& reveal) const {
  if (!done()) throw GarbleError("decoder requested before garbling finished");
  OutputDecoder d;
  for (const auto& name : reveal) {
    const auto& bus = circuit_.output(name).bus;
    std::vector<OutputDecoder::Entry> entries;
    entries.reserve(bus.width());
    for (std::size_t i = 0; i < bus.width(); ++i) {
      const Block l0 = label0_[bus[i]];
      entries.push_back({output_tag(l0, static_cast<Wire>(i)), output_tag(l0 ^ delta_, static_cast<Wire>(i))});
    }
    d.add_bus(name, std::move(entries));
  }
  return d;
}

// --- evaluator -------------------------------------------------------------

Evaluator::Evaluator(const Circuit& circuit)
    : circuit_(circuit), active_(circuit.wire_count()), assigned_(circuit.wire_count(), 0) {}

void Evaluator::set_bus(const std::string& bus, std::span<const Block> labels) {
  const auto& in = circuit_.input(bus);
  if (labels.size() != in.bus.width()) throw GarbleError("label count mismatch for '" + bus + "'");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    active_[in.bus[i]] = labels[i];
    assigned_[in.bus[i]] = 1;
  }
}

void Evaluator::set_constants(const std::array<Block, 2>& labels) {
  active_[Circuit::kZero] = labels[0];
  active_[Circuit::kOne] = labels[1];
  assigned_[Circuit::kZero] = assigned_[Circuit::kOne] = 1;
}

void Evaluator::check_inputs() {
  if (inputs_checked_) return;
  if (!assigned_[Circuit::kZero] || !assigned_[Circuit::kOne])
    throw GarbleError("constant labels missing");
  for (const auto& in : circuit_.inputs())
    for (Wire w : in.bus.wires)
      if (!assigned_[w]) throw GarbleError("input bus '" + in.name + "' has no labels");
  inputs_checked_ = true;
}

void Evaluator::consume(std::span<const GarbledGate> tables) {
  check_inputs();
  const auto& gates = circuit_.gates();
  std::size_t t = 0;
  while (next_ < gates.size()) {
    const auto& g = gates[next_];
    if (g.kind == GateKind::Xor) {
      active_[next_] = active_[g.a] ^ active_[g.b];
    } else if (g.kind == GateKind::And) {
      if (t == tables.size()) break;
      const GarbledGate& gg = tables[t++];
      if (gg.index != next_) throw GarbleError("garbled gate stream out of order");
      const Block& a = active_[g.a];
      const Block& b = active_[g.b];
      const int row = (a.lsb() ? 2 : 0) | (b.lsb() ? 1 : 0);
      active_[next_] = gg.rows[row] ^ gate_hash(a, b, gg.index);
    }
    ++next_;
  }
  if (t != tables.size()) throw GarbleError("more garbled tables than AND gates");
}

void Evaluator::finish() {
  consume({});
  if (!done()) throw GarbleError("garbled tables missing at end of stream");
}

std::vector<Block> Evaluator::labels(const circuit::Bus& bus) const {
  std::vector<Block> out;
  out.reserve(bus.width());
  for (Wire w : bus.wires) {
    if (w >= next_ && !assigned_[w]) throw GarbleError("wire not yet evaluated");
    out.push_back(active_[w]);
  }
  return out;
}

std::vector<Block> Evaluator::output_labels(const std::string& name) const {
  return labels(circuit_.output(name).bus);
}

// --- whole-circuit wrappers -------------------------------------------------

GarbleResult garble(const Circuit& circuit, std::uint64_t seed, const std::vector<std::string>& reveal) {
  Garbler g(circuit, seed);
  GarbleResult r;
  for (const auto& in : circuit.inputs()) r.encoding[in.name] = g.label_pairs(in.name);
  r.constants = g.constant_labels();
  r.garbled.gates = g.garble_next(SIZE_MAX);
  r.decoder = g.decoder(reveal);
  return r;
}

std::vector<Block> encode_inputs(const GarbleResult& garbled, const std::string& bus, std::uint64_t value) {
  const auto it = garbled.encoding.find(bus);
  if (it == garbled.encoding.end()) throw GarbleError("no encoding for bus '" + bus + "'");
  std::vector<Block> out;
  out.reserve(it->second.size());
  for (std::size_t i = 0; i < it->second.size(); ++i)
    out.push_back(i < 64 && ((value >> i) & 1u) ? it->second[i].label1 : it->second[i].label0);
  return out;
}

std::map<std::string, std::vector<Block>> evaluate(
    const Circuit& circuit, const GarbledCircuit& garbled,
    const std::map<std::string, std::vector<Block>>& input_labels, const std::array<Block, 2>& constants) {
  Evaluator ev(circuit);
  ev.set_constants(constants);
  for (const auto& [name, labels] : input_labels) ev.set_bus(name, labels);
  ev.consume(garbled.gates);
  ev.finish();
  std::map<std::string, std::vector<Block>> out;
  for (const auto& o : circuit.outputs()) out[o.name] = ev.output_labels(o.name);
  return out;
}

}  // namespace ppmcsa::gc
