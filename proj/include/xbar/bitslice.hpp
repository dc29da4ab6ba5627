#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace xbar {

/// Bit-sliced crossbar shape. Each row holds `slots_per_row` weights, each
/// weight spread over `bits` power-of-two columns (column 0 = 2^0).
struct CrossbarGeometry {
  std::size_t rows = 128;
  std::size_t bits = 10;
  std::size_t slots_per_row = 1;

  std::size_t capacity() const { return rows * slots_per_row; }
  std::size_t columns() const { return slots_per_row * bits; }
  void validate() const;

  friend bool operator==(const CrossbarGeometry&, const CrossbarGeometry&) = default;
};

inline constexpr std::size_t kMaxBits = 30;

/// Binary memristor states, row-major, 0 = inactive and 1 = active.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }

  std::uint8_t at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, std::uint8_t v) { cells_[r * cols_ + c] = v; }

  std::span<const std::uint8_t> cells() const { return cells_; }
  std::span<std::uint8_t> cells() { return cells_; }

  bool same_shape(const BitMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Builds a BitMatrix from nested rows; all rows must have equal length.
BitMatrix bit_matrix(std::initializer_list<std::initializer_list<int>> rows);

struct ScaleRule {
  enum class Kind { per_section_max, global_max, explicit_scale };

  Kind kind = Kind::per_section_max;
  // global_max: largest |w| over the whole tensor (negative = derive it from
  // the weights at hand). explicit_scale: the scale itself.
  double value = -1.0;

  static ScaleRule per_section() { return {Kind::per_section_max, -1.0}; }
  static ScaleRule global(double max_abs = -1.0) { return {Kind::global_max, max_abs}; }
  static ScaleRule fixed(double scale) { return {Kind::explicit_scale, scale}; }
};

struct Quantized {
  std::vector<std::uint32_t> magnitudes;
  std::vector<std::int8_t> signs;
  double scale = 1.0;
};

/// Largest magnitude representable with `bits` columns.
inline std::uint32_t max_magnitude(std::size_t bits) {
  return static_cast<std::uint32_t>((std::uint64_t{1} << bits) - 1);
}

/// Scale implied by a rule for weights whose largest |w| is `max_abs`.
double resolve_scale(const ScaleRule& rule, double max_abs, std::size_t bits);

/// Sign-magnitude fixed point: m = round(|w| / scale) clamped to [0, 2^B - 1],
/// rounding half away from zero. A zero magnitude carries sign 0.
Quantized quantize(std::span<const float> weights, std::size_t bits, ScaleRule rule);

inline constexpr std::size_t kPadSlot = std::numeric_limits<std::size_t>::max();

/// One crossbar's worth of weights. Slot k lives at row k / slots_per_row,
/// slot position k % slots_per_row; bit j of that slot sits in physical
/// column (k % slots_per_row) * bits + j. Trailing slots past the supplied
/// weights are padding with magnitude 0 and index kPadSlot.
struct SlicedSection {
  CrossbarGeometry geometry;
  BitMatrix bits;
  std::vector<std::int8_t> signs;
  double scale = 1.0;
  std::vector<std::size_t> index_map;
  std::size_t pad_count = 0;

  std::size_t used_slots() const { return geometry.capacity() - pad_count; }
  std::uint32_t magnitude(std::size_t slot) const { return magnitude(slot, bits); }
  /// Magnitude of `slot` as read from an arbitrary state with this geometry.
  std::uint32_t magnitude(std::size_t slot, const BitMatrix& state) const;
};

inline std::size_t slot_row(const CrossbarGeometry& g, std::size_t slot) {
  return slot / g.slots_per_row;
}
inline std::size_t slot_column(const CrossbarGeometry& g, std::size_t slot, std::size_t bit) {
  return (slot % g.slots_per_row) * g.bits + bit;
}

/// Quantizes and lays out `weights`. `indices`, when given, records the
/// original flat index of each weight; otherwise 0..n-1 is used.
SlicedSection slice_section(std::span<const float> weights, const CrossbarGeometry& geometry,
                            ScaleRule rule, std::span<const std::size_t> indices = {});

/// w_k = sign_k * scale * sum_j bit(k, j) 2^j for the non-padding slots.
std::vector<double> reconstruct(const SlicedSection& section);

// Same formula, reading bits from `state` (e.g. a crossbar with stale cells).
// A slot quantized to zero has no stored sign; stale active cells there read
// as positive.
std::vector<double> reconstruct(const SlicedSection& section, const BitMatrix& state);

/// Fraction of non-padding slots whose bit j is set, pooled over sections.
std::vector<double> column_activity(std::span<const SlicedSection> sections);

}  // namespace xbar
