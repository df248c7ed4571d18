#include "ppmcsa/builders.hpp"

#include <algorithm>
#include <string>

namespace ppmcsa::circuit {

namespace {

void require_same_width(const Bus& a, const Bus& b, const char* what) {
  if (a.width() != b.width() || a.width() == 0)
    throw CircuitError(std::string(what) + ": width mismatch (" + std::to_string(a.width()) + " vs " +
                       std::to_string(b.width()) + ")");
}

void require_flag(const Bus& lambda, const char* what) {
  if (lambda.width() != 1) throw CircuitError(std::string(what) + ": selector must be 1 bit");
}

// Ripple-carry sum of equal-width operands; one AND per carry produced.
Bus ripple_add(Circuit& c, const Bus& a, const Bus& b, Wire carry) {
  Bus out;
  out.wires.reserve(a.width());
  for (std::size_t i = 0; i < a.width(); ++i) {
    const Wire axc = c.xor_gate(a[i], carry);
    out.wires.push_back(c.xor_gate(axc, b[i]));
    if (i + 1 < a.width()) carry = c.xor_gate(carry, c.and_gate(axc, c.xor_gate(b[i], carry)));
  }
  return out;
}

}  // namespace

Bus resize(const Bus& bus, std::size_t width) {
  Bus out;
  out.wires.assign(bus.wires.begin(), bus.wires.begin() + std::min(width, bus.width()));
  out.wires.resize(width, Circuit::kZero);
  return out;
}

Bus concat(const Bus& low, const Bus& high) {
  Bus out = low;
  out.wires.insert(out.wires.end(), high.wires.begin(), high.wires.end());
  return out;
}

Bus invert(Circuit& c, const Bus& bus) {
  Bus out;
  out.wires.reserve(bus.width());
  for (Wire w : bus.wires) out.wires.push_back(c.not_gate(w));
  return out;
}

Bus build_adder(Circuit& c, const Bus& a, const Bus& b) {
  require_same_width(a, b, "adder");
  return ripple_add(c, a, b, Circuit::kZero);
}

Bus add(Circuit& c, const Bus& a, const Bus& b, std::size_t width) {
  if (width == 0) throw CircuitError("adder: zero output width");
  return ripple_add(c, resize(a, width), resize(b, width), Circuit::kZero);
}

Wire ge(Circuit& c, const Bus& a, const Bus& b) {
  const std::size_t w = std::max(a.width(), b.width());
  const Bus x = resize(a, w);
  const Bus y = resize(b, w);
  // Carry out of x + ~y + 1.
  Wire carry = Circuit::kOne;
  for (std::size_t i = 0; i < w; ++i) {
    const Wire ny = c.not_gate(y[i]);
    carry = c.xor_gate(carry, c.and_gate(c.xor_gate(x[i], carry), c.xor_gate(ny, carry)));
  }
  return carry;
}

Wire lt(Circuit& c, const Bus& a, const Bus& b) { return c.not_gate(ge(c, a, b)); }

Bus build_ge(Circuit& c, const Bus& a, const Bus& b) {
  require_same_width(a, b, "comparator");
  return Bus{{ge(c, a, b)}};
}

std::pair<Bus, Bus> cond_swap(Circuit& c, const Bus& x, const Bus& y, Wire lambda) {
  Bus xs, ys;
  xs.wires.reserve(x.width());
  ys.wires.reserve(x.width());
  for (std::size_t i = 0; i < x.width(); ++i) {
    const Wire diff = c.xor_gate(x[i], y[i]);
    const Wire xn = c.xor_gate(c.and_gate(diff, lambda), x[i]);
    xs.wires.push_back(xn);
    ys.wires.push_back(c.xor_gate(xn, diff));
  }
  return {xs, ys};
}

std::pair<Bus, Bus> build_cond_swap(Circuit& c, const Bus& x, const Bus& y, const Bus& lambda) {
  require_same_width(x, y, "cond_swap");
  require_flag(lambda, "cond_swap");
  return cond_swap(c, x, y, lambda[0]);
}

Bus mux(Circuit& c, Wire lambda, const Bus& a, const Bus& b) {
  Bus out;
  out.wires.reserve(a.width());
  for (std::size_t i = 0; i < a.width(); ++i)
    out.wires.push_back(c.xor_gate(c.and_gate(c.xor_gate(a[i], b[i]), lambda), b[i]));
  return out;
}

Bus build_mux(Circuit& c, const Bus& lambda, const Bus& a, const Bus& b) {
  require_same_width(a, b, "mux");
  require_flag(lambda, "mux");
  return mux(c, lambda[0], a, b);
}

Bus gate_by(Circuit& c, Wire flag, const Bus& value) {
  Bus out;
  out.wires.reserve(value.width());
  for (Wire w : value.wires) out.wires.push_back(c.and_gate(w, flag));
  return out;
}

Bus build_mul(Circuit& c, const Bus& a, const Bus& b, std::size_t out_width) {
  if (a.width() == 0 || b.width() == 0) throw CircuitError("mul: zero-width operand");
  if (out_width == 0) out_width = a.width() + b.width();
  Bus acc = c.constant(0, out_width);
  for (std::size_t j = 0; j < b.width() && j < out_width; ++j) {
    Bus partial = c.constant(0, j);
    const Bus row = gate_by(c, b[j], a);
    partial.wires.insert(partial.wires.end(), row.wires.begin(), row.wires.end());
    acc = add(c, acc, partial, out_width);
  }
  return acc;
}

Bus mul_const(Circuit& c, const Bus& a, std::uint64_t k, std::size_t out_width) {
  Bus acc = c.constant(0, out_width);
  for (std::size_t j = 0; j < 64 && j < out_width; ++j) {
    if (!((k >> j) & 1u)) continue;
    Bus shifted = c.constant(0, j);
    shifted.wires.insert(shifted.wires.end(), a.wires.begin(), a.wires.end());
    acc = add(c, acc, shifted, out_width);
  }
  return acc;
}

Bus build_min(Circuit& c, const Bus& a, const Bus& b) {
  require_same_width(a, b, "min");
  return mux(c, ge(c, a, b), b, a);
}

Wire any_bit(Circuit& c, const Bus& bus) {
  Wire acc = Circuit::kZero;
  for (Wire w : bus.wires) acc = c.or_gate(acc, w);
  return acc;
}

std::size_t ceil_log2(std::uint64_t n) {
  std::size_t bits = 0;
  while ((std::uint64_t{1} << bits) < n) ++bits;
  return bits;
}

std::size_t bits_for(std::uint64_t max_value) {
  std::size_t bits = 1;
  while (bits < 64 && (max_value >> bits) != 0) ++bits;
  return bits;
}

std::vector<Bus> build_prefix_sums(Circuit& c, const std::vector<Bus>& values) {
  if (values.empty()) throw CircuitError("prefix sums of an empty list");
  for (const auto& v : values) require_same_width(v, values.front(), "prefix sums");
  const std::size_t width = values.front().width() + ceil_log2(values.size());
  std::vector<Bus> out;
  out.reserve(values.size());
  out.push_back(resize(values.front(), width));
  for (std::size_t j = 1; j < values.size(); ++j) out.push_back(add(c, out.back(), values[j], width));
  return out;
}

Bus sum_range(Circuit& c, const std::vector<Bus>& values, std::size_t count, std::size_t width) {
  Bus acc = c.constant(0, width);
  if (count == 0) return acc;
  acc = resize(values[0], width);
  for (std::size_t l = 1; l < count; ++l) acc = add(c, acc, values[l], width);
  return acc;
}

Bus record_key(Circuit& c, const Record& record, const KeySpec& key) {
  Bus out;
  for (auto it = key.rbegin(); it != key.rend(); ++it) {
    const Bus& field = record.at(it->field);
    out = concat(out, it->inverted ? invert(c, field) : field);
  }
  return out;
}

Wire compare_exchange(Circuit& c, std::vector<Record>& records, std::size_t i, std::size_t j,
                      const KeySpec& key, Order order) {
  const Bus ki = record_key(c, records[i], key);
  const Bus kj = record_key(c, records[j], key);
  // Ascending: swap when key_i > key_j. Descending: swap when key_i < key_j.
  const Wire flag = order == Order::Ascending ? lt(c, kj, ki) : lt(c, ki, kj);
  for (std::size_t f = 0; f < records[i].size(); ++f) {
    auto [x, y] = cond_swap(c, records[i][f], records[j][f], flag);
    records[i][f] = std::move(x);
    records[j][f] = std::move(y);
  }
  return flag;
}

std::vector<std::pair<std::size_t, std::size_t>> batcher_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 1; p < n; p += p) {
    for (std::size_t k = p; k > 0; k /= 2) {
      for (std::size_t j = k % p; j + k < n; j += 2 * k) {
        for (std::size_t i = 0; i < std::min(k, n - j - k); ++i) {
          if ((i + j) / (2 * p) == (i + j + k) / (2 * p)) out.emplace_back(i + j, i + j + k);
        }
      }
    }
  }
  return out;
}

SortedRecords build_sort_network(Circuit& c, std::vector<Record> records, const KeySpec& key,
                                 Order order) {
  if (records.empty()) throw CircuitError("sort network needs at least one record");
  for (const auto& r : records) {
    if (r.size() != records.front().size()) throw CircuitError("records differ in field count");
    for (std::size_t f = 0; f < r.size(); ++f)
      if (r[f].width() != records.front()[f].width())
        throw CircuitError("records differ in field width");
  }
  SortedRecords out;
  out.comparators = batcher_pairs(records.size());
  out.swap_flags.reserve(out.comparators.size());
  for (const auto& [i, j] : out.comparators)
    out.swap_flags.push_back(compare_exchange(c, records, i, j, key, order));
  out.records = std::move(records);
  return out;
}

std::vector<Bus> unsort(Circuit& c, const std::vector<std::pair<std::size_t, std::size_t>>& comparators,
                        const std::vector<Wire>& swap_flags, std::vector<Bus> values) {
  if (comparators.size() != swap_flags.size()) throw CircuitError("unsort: flag count mismatch");
  for (std::size_t n = comparators.size(); n-- > 0;) {
    const auto [i, j] = comparators[n];
    auto [x, y] = cond_swap(c, values.at(i), values.at(j), swap_flags[n]);
    values[i] = std::move(x);
    values[j] = std::move(y);
  }
  return values;
}

}  // namespace ppmcsa::circuit
