#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "xbar/bitslice.hpp"

namespace xbar {

enum class SectionOrder { sorted, original };

std::string_view to_string(SectionOrder order);
SectionOrder parse_order(std::string_view text);

/// Partition of a flat weight vector into crossbar-sized sections.
struct SectionPlan {
  SectionOrder order = SectionOrder::sorted;
  std::size_t section_size = 0;
  std::vector<std::vector<std::size_t>> sections;  // original flat indices
  std::vector<std::size_t> permutation;            // list position -> original index

  std::size_t section_count() const { return sections.size(); }
  std::size_t weight_count() const { return permutation.size(); }
};

// Sorted order is a stable sort by |w| ascending, so equal magnitudes keep
// ascending original index. The last section may be partial.
SectionPlan build_plan(std::span<const float> weights, std::size_t section_size, SectionOrder order);

/// Slices every section of `plan`. A global_max rule without an explicit
/// value takes the largest |w| across all of `weights`.
std::vector<SlicedSection> materialize(const SectionPlan& plan, std::span<const float> weights,
                                       const CrossbarGeometry& geometry, ScaleRule rule);

// Per-slot products reconstruct(k) * input[index_map[k]], one entry per
// crossbar slot (padding yields 0). Summing them gives the section's share of
// the original-order dot product.
std::vector<double> apply_index_matching(const SlicedSection& section, std::span<const double> input);

/// Scatters reconstructed section values back to original flat positions.
std::vector<double> assemble_weights(std::span<const SlicedSection> sections, std::size_t weight_count);

}  // namespace xbar
