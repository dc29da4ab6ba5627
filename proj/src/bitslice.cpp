#include "xbar/bitslice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xbar/error.hpp"

namespace xbar {

void CrossbarGeometry::validate() const {
  if (rows == 0 || slots_per_row == 0) throw ValidationError("crossbar geometry must be non-empty");
  if (bits == 0 || bits > kMaxBits) {
    throw UnsupportedWidthError("bit width " + std::to_string(bits) + " outside [1, " +
                                std::to_string(kMaxBits) + "]");
  }
}

BitMatrix bit_matrix(std::initializer_list<std::initializer_list<int>> rows) {
  const std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  BitMatrix m(rows.size(), cols);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != cols) throw ValidationError("ragged bit matrix");
    std::size_t c = 0;
    for (int v : row) {
      if (v != 0 && v != 1) throw ValidationError("bit matrix cells must be 0 or 1");
      m.set(r, c++, static_cast<std::uint8_t>(v));
    }
    ++r;
  }
  return m;
}

double resolve_scale(const ScaleRule& rule, double max_abs, std::size_t bits) {
  switch (rule.kind) {
    case ScaleRule::Kind::explicit_scale:
      if (!(rule.value > 0.0) || !std::isfinite(rule.value)) {
        throw ValidationError("explicit scale must be positive and finite");
      }
      return rule.value;
    case ScaleRule::Kind::global_max:
      if (rule.value >= 0.0) max_abs = std::max(max_abs, rule.value);
      break;
    case ScaleRule::Kind::per_section_max:
      break;
  }
  return max_abs > 0.0 ? max_abs / max_magnitude(bits) : 1.0;
}

Quantized quantize(std::span<const float> weights, std::size_t bits, ScaleRule rule) {
  if (bits == 0 || bits > kMaxBits) {
    throw UnsupportedWidthError("bit width " + std::to_string(bits) + " outside [1, " +
                                std::to_string(kMaxBits) + "]");
  }
  if (weights.empty()) throw ValidationError("cannot quantize an empty weight vector");

  double max_abs = 0.0;
  for (float w : weights) {
    if (!std::isfinite(w)) throw ValidationError("non-finite weight");
    max_abs = std::max(max_abs, std::fabs(static_cast<double>(w)));
  }

  Quantized q;
  q.scale = resolve_scale(rule, max_abs, bits);
  const double top = max_magnitude(bits);
  q.magnitudes.reserve(weights.size());
  q.signs.reserve(weights.size());
  for (float w : weights) {
    const double r = std::round(std::fabs(static_cast<double>(w)) / q.scale);
    const auto m = static_cast<std::uint32_t>(std::min(r, top));
    q.magnitudes.push_back(m);
    q.signs.push_back(m == 0 ? 0 : (w < 0 ? -1 : 1));
  }
  return q;
}

std::uint32_t SlicedSection::magnitude(std::size_t slot, const BitMatrix& state) const {
  const auto row = slot_row(geometry, slot);
  std::uint32_t m = 0;
  for (std::size_t j = 0; j < geometry.bits; ++j) {
    m |= std::uint32_t{state.at(row, slot_column(geometry, slot, j))} << j;
  }
  return m;
}

SlicedSection slice_section(std::span<const float> weights, const CrossbarGeometry& geometry,
                            ScaleRule rule, std::span<const std::size_t> indices) {
  geometry.validate();
  const std::size_t capacity = geometry.capacity();
  if (weights.size() > capacity) {
    throw CapacityError(std::to_string(weights.size()) + " weights exceed crossbar capacity " +
                        std::to_string(capacity));
  }
  if (!indices.empty() && indices.size() != weights.size()) {
    throw ValidationError("index list length does not match weight count");
  }
  const auto q = quantize(weights, geometry.bits, rule);

  SlicedSection s;
  s.geometry = geometry;
  s.bits = BitMatrix(geometry.rows, geometry.columns());
  s.signs.assign(capacity, 0);
  s.index_map.assign(capacity, kPadSlot);
  s.scale = q.scale;
  s.pad_count = capacity - weights.size();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    s.signs[k] = q.signs[k];
    s.index_map[k] = indices.empty() ? k : indices[k];
    const auto row = slot_row(geometry, k);
    for (std::size_t j = 0; j < geometry.bits; ++j) {
      s.bits.set(row, slot_column(geometry, k, j), static_cast<std::uint8_t>((q.magnitudes[k] >> j) & 1U));
    }
  }
  return s;
}

std::vector<double> reconstruct(const SlicedSection& section) {
  return reconstruct(section, section.bits);
}

std::vector<double> reconstruct(const SlicedSection& section, const BitMatrix& state) {
  if (state.rows() != section.geometry.rows || state.cols() != section.geometry.columns()) {
    throw ValidationError("state shape does not match section geometry");
  }
  std::vector<double> out(section.used_slots());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double sign = section.signs[k] < 0 ? -1.0 : 1.0;
    out[k] = sign * section.scale * section.magnitude(k, state);
  }
  return out;
}

std::vector<double> column_activity(std::span<const SlicedSection> sections) {
  if (sections.empty()) throw ValidationError("column activity needs at least one section");
  const std::size_t bits = sections.front().geometry.bits;
  std::vector<std::uint64_t> ones(bits, 0);
  std::uint64_t slots = 0;
  for (const auto& s : sections) {
    if (s.geometry.bits != bits) throw ValidationError("sections disagree on bit width");
    for (std::size_t k = 0; k < s.used_slots(); ++k) {
      const auto m = s.magnitude(k);
      for (std::size_t j = 0; j < bits; ++j) ones[j] += (m >> j) & 1U;
    }
    slots += s.used_slots();
  }
  std::vector<double> activity(bits, 0.0);
  if (slots == 0) return activity;
  for (std::size_t j = 0; j < bits; ++j) {
    activity[j] = static_cast<double>(ones[j]) / static_cast<double>(slots);
  }
  return activity;
}

}  // namespace xbar
