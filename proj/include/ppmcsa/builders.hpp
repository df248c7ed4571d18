#pragma once

// Data-oblivious combinators over Circuit. Widths are explicit; the strict
// build_* functions throw CircuitError on a width mismatch.

#include <cstdint>
#include <utility>
#include <vector>

#include "ppmcsa/circuit.hpp"

namespace ppmcsa::circuit {

// Zero-extends or truncates.
Bus resize(const Bus& bus, std::size_t width);
// Concatenation, `low` supplies the least significant bits.
Bus concat(const Bus& low, const Bus& high);
Bus invert(Circuit& c, const Bus& bus);

// (a + b) mod 2^W with W - 1 AND gates.
Bus build_adder(Circuit& c, const Bus& a, const Bus& b);
// a + b in `width` bits after zero-extending both operands.
Bus add(Circuit& c, const Bus& a, const Bus& b, std::size_t width);

// 1 iff a >= b (unsigned); W AND gates.
Bus build_ge(Circuit& c, const Bus& a, const Bus& b);
Wire ge(Circuit& c, const Bus& a, const Bus& b);  // operands zero-extended to a common width
Wire lt(Circuit& c, const Bus& a, const Bus& b);

// Swaps x and y when lambda = 1; W AND gates.
std::pair<Bus, Bus> build_cond_swap(Circuit& c, const Bus& x, const Bus& y, const Bus& lambda);
std::pair<Bus, Bus> cond_swap(Circuit& c, const Bus& x, const Bus& y, Wire lambda);

// lambda ? a : b; W AND gates.
Bus build_mux(Circuit& c, const Bus& lambda, const Bus& a, const Bus& b);
Bus mux(Circuit& c, Wire lambda, const Bus& a, const Bus& b);
// Bitwise AND of every wire with `flag`.
Bus gate_by(Circuit& c, Wire flag, const Bus& value);

// Shift-and-add product; out_width 0 means |a| + |b|, narrower widths wrap.
Bus build_mul(Circuit& c, const Bus& a, const Bus& b, std::size_t out_width = 0);
// Product with a public constant: adds shifted copies of `a` for each set bit.
Bus mul_const(Circuit& c, const Bus& a, std::uint64_t k, std::size_t out_width);

Bus build_min(Circuit& c, const Bus& a, const Bus& b);

// OR of all bits.
Wire any_bit(Circuit& c, const Bus& bus);

std::size_t ceil_log2(std::uint64_t n);
// Bits needed to represent `max_value` (at least 1).
std::size_t bits_for(std::uint64_t max_value);

// out[j] = values[0] + ... + values[j], each W + ceil(log2 n) bits wide.
std::vector<Bus> build_prefix_sums(Circuit& c, const std::vector<Bus>& values);
// values[0] + ... + values[count - 1] as a fresh adder chain.
Bus sum_range(Circuit& c, const std::vector<Bus>& values, std::size_t count, std::size_t width);

// --- sorting networks ----------------------------------------------------

using Record = std::vector<Bus>;

enum class Order { Ascending, Descending };

struct KeyField {
  std::size_t field;
  bool inverted = false;  // compare on the bitwise complement
};

// Most significant field first.
using KeySpec = std::vector<KeyField>;

Bus record_key(Circuit& c, const Record& record, const KeySpec& key);

// Orders records[i] and records[j] (i < j) and returns the swap flag.
Wire compare_exchange(Circuit& c, std::vector<Record>& records, std::size_t i, std::size_t j,
                      const KeySpec& key, Order order);

// Batcher odd-even merge sort comparators for n elements.
std::vector<std::pair<std::size_t, std::size_t>> batcher_pairs(std::size_t n);

struct SortedRecords {
  std::vector<Record> records;
  std::vector<std::pair<std::size_t, std::size_t>> comparators;
  std::vector<Wire> swap_flags;
};

SortedRecords build_sort_network(Circuit& c, std::vector<Record> records, const KeySpec& key,
                                 Order order);

// Replays recorded swaps in reverse, moving per-position values back to the
// positions the records held before the network ran.
std::vector<Bus> unsort(Circuit& c, const std::vector<std::pair<std::size_t, std::size_t>>& comparators,
                        const std::vector<Wire>& swap_flags, std::vector<Bus> values);

}  // namespace ppmcsa::circuit
