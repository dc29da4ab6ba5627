#include "xbar/cost_model.hpp"

#include <limits>
#include <string>

#include "xbar/error.hpp"

namespace xbar {

SwitchCount reprogram_cost(const BitMatrix& from, const BitMatrix& to, std::size_t bits) {
  if (!from.same_shape(to)) {
    throw ValidationError("reprogram cost of mismatched shapes " + std::to_string(from.rows()) + "x" +
                          std::to_string(from.cols()) + " vs " + std::to_string(to.rows()) + "x" +
                          std::to_string(to.cols()));
  }
  const std::size_t groups = bits == 0 ? from.cols() : bits;
  if (groups == 0 || from.cols() % groups != 0) {
    throw ValidationError("column count is not a multiple of the bit width");
  }
  SwitchCount out;
  out.per_column.assign(groups, 0);
  const auto a = from.cells();
  const auto b = to.cells();
  const std::size_t cols = from.cols();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) ++out.per_column[(i % cols) % groups];
  }
  for (auto c : out.per_column) out.total += c;
  return out;
}

NextSection best_next_section(const BitMatrix& current, std::span<const SlicedSection> candidates) {
  if (candidates.empty()) throw ValidationError("no candidate sections");
  NextSection best{0, std::numeric_limits<std::uint64_t>::max()};
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cost = reprogram_cost(current, candidates[i].bits).total;
    if (cost < best.cost) best = {i, cost};
  }
  return best;
}

void CostLedger::record(std::size_t section, const SwitchCount& cost, bool counted) {
  if (per_column.size() < cost.per_column.size()) per_column.resize(cost.per_column.size(), 0);
  const std::size_t step = per_step.size();
  if (!counted) {
    excluded_initial += cost.total;
    per_step.push_back({step, section, 0});
    return;
  }
  for (std::size_t j = 0; j < cost.per_column.size(); ++j) per_column[j] += cost.per_column[j];
  total_switches += cost.total;
  per_step.push_back({step, section, cost.total});
}

CostLedger sequence_cost(std::span<const SlicedSection> sections, std::span<const std::size_t> visit,
                         const BitMatrix* initial, SequenceOptions options) {
  CostLedger ledger;
  if (visit.empty()) {
    if (!sections.empty()) ledger.per_column.assign(sections.front().geometry.bits, 0);
    return ledger;
  }
  for (auto id : visit) {
    if (id >= sections.size()) throw ValidationError("visit refers to missing section " + std::to_string(id));
  }
  const auto& geometry = sections[visit.front()].geometry;
  ledger.per_column.assign(geometry.bits, 0);

  const BitMatrix blank(geometry.rows, geometry.columns());
  const BitMatrix* state = initial ? initial : &blank;
  if (!state->same_shape(blank)) throw ValidationError("initial state does not match section geometry");

  for (std::size_t k = 0; k < visit.size(); ++k) {
    const auto& target = sections[visit[k]];
    if (!(target.geometry == geometry)) throw ValidationError("sections in a sequence must share geometry");
    const auto cost = reprogram_cost(*state, target.bits, geometry.bits);
    const bool counted = !(k == 0 && initial == nullptr && !options.include_initial);
    ledger.record(visit[k], cost, counted);
    state = &target.bits;
  }
  return ledger;
}

std::vector<std::size_t> nearest_neighbor_order(std::span<const SlicedSection> sections,
                                                const BitMatrix* initial) {
  std::vector<std::size_t> order;
  if (sections.empty()) return order;
  const auto& g = sections.front().geometry;
  BitMatrix state = initial ? *initial : BitMatrix(g.rows, g.columns());
  std::vector<bool> done(sections.size(), false);
  order.reserve(sections.size());
  for (std::size_t n = 0; n < sections.size(); ++n) {
    std::size_t best = 0;
    auto best_cost = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (done[i]) continue;
      const auto c = reprogram_cost(state, sections[i].bits).total;
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    done[best] = true;
    order.push_back(best);
    state = sections[best].bits;
  }
  return order;
}

}  // namespace xbar
