#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xbar/bitslice.hpp"

namespace xbar {

/// Switch count between two states, also split by bit significance.
struct SwitchCount {
  std::uint64_t total = 0;
  std::vector<std::uint64_t> per_column;
};

// Hamming distance between equally shaped states. per_column has `bits`
// entries grouping physical column c under significance c % bits; with
// bits == 0 every physical column is reported separately.
SwitchCount reprogram_cost(const BitMatrix& from, const BitMatrix& to, std::size_t bits = 0);

struct NextSection {
  std::size_t index = 0;
  std::uint64_t cost = 0;
};

/// Exhaustive arg-min of reprogram_cost over candidates; ties go to the
/// lowest index.
NextSection best_next_section(const BitMatrix& current, std::span<const SlicedSection> candidates);

struct LedgerStep {
  std::size_t step = 0;
  std::size_t section = 0;
  std::uint64_t switches = 0;
};

struct CostLedger {
  std::uint64_t total_switches = 0;
  std::vector<std::uint64_t> per_column;
  std::vector<LedgerStep> per_step;
  // Switches spent programming an erased crossbar when the caller asked to
  // leave them out of the totals above.
  std::uint64_t excluded_initial = 0;

  void record(std::size_t section, const SwitchCount& cost, bool counted);
};

struct SequenceOptions {
  bool include_initial = true;
};

// Programs `visit` (indices into `sections`) in order. With no `initial`
// state the crossbar starts erased (all zero), and that first programming is
// the step `include_initial` refers to.
CostLedger sequence_cost(std::span<const SlicedSection> sections, std::span<const std::size_t> visit,
                         const BitMatrix* initial = nullptr, SequenceOptions options = {});

/// Visit order that repeatedly jumps to the cheapest not-yet-programmed section.
std::vector<std::size_t> nearest_neighbor_order(std::span<const SlicedSection> sections,
                                                const BitMatrix* initial = nullptr);

}  // namespace xbar
