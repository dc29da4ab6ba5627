#include "xbar/sws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xbar/error.hpp"

namespace xbar {

std::string_view to_string(SectionOrder order) {
  return order == SectionOrder::sorted ? "sorted" : "original";
}

SectionOrder parse_order(std::string_view text) {
  if (text == "sorted") return SectionOrder::sorted;
  if (text == "original") return SectionOrder::original;
  throw ValidationError("unknown section order '" + std::string(text) + "'");
}

SectionPlan build_plan(std::span<const float> weights, std::size_t section_size, SectionOrder order) {
  if (weights.empty()) throw ValidationError("cannot section an empty weight vector");
  if (section_size == 0) throw ValidationError("section size must be positive");

  SectionPlan plan;
  plan.order = order;
  plan.section_size = section_size;
  plan.permutation.resize(weights.size());
  std::iota(plan.permutation.begin(), plan.permutation.end(), std::size_t{0});
  if (order == SectionOrder::sorted) {
    std::stable_sort(plan.permutation.begin(), plan.permutation.end(),
                     [&](std::size_t a, std::size_t b) {
                       return std::fabs(weights[a]) < std::fabs(weights[b]);
                     });
  }
  for (std::size_t start = 0; start < weights.size(); start += section_size) {
    const auto end = std::min(weights.size(), start + section_size);
    plan.sections.emplace_back(plan.permutation.begin() + static_cast<std::ptrdiff_t>(start),
                               plan.permutation.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

std::vector<SlicedSection> materialize(const SectionPlan& plan, std::span<const float> weights,
                                       const CrossbarGeometry& geometry, ScaleRule rule) {
  geometry.validate();
  if (plan.section_size > geometry.capacity()) {
    throw CapacityError("section size " + std::to_string(plan.section_size) +
                        " exceeds crossbar capacity " + std::to_string(geometry.capacity()));
  }
  if (rule.kind == ScaleRule::Kind::global_max && rule.value < 0.0) {
    double max_abs = 0.0;
    for (float w : weights) max_abs = std::max(max_abs, std::fabs(static_cast<double>(w)));
    rule.value = max_abs;
  }

  std::vector<SlicedSection> out;
  out.reserve(plan.section_count());
  std::vector<float> values;
  for (const auto& idx : plan.sections) {
    values.clear();
    for (auto i : idx) {
      if (i >= weights.size()) throw ValidationError("section index out of range");
      values.push_back(weights[i]);
    }
    out.push_back(slice_section(values, geometry, rule, idx));
  }
  return out;
}

std::vector<double> apply_index_matching(const SlicedSection& section, std::span<const double> input) {
  const auto values = reconstruct(section);
  std::vector<double> products(section.geometry.capacity(), 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto idx = section.index_map[k];
    if (idx >= input.size()) {
      throw ValidationError("index " + std::to_string(idx) + " outside input of length " +
                            std::to_string(input.size()));
    }
    products[k] = values[k] * input[idx];
  }
  return products;
}

std::vector<double> assemble_weights(std::span<const SlicedSection> sections, std::size_t weight_count) {
  std::vector<double> out(weight_count, 0.0);
  for (const auto& s : sections) {
    const auto values = reconstruct(s);
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (s.index_map[k] >= weight_count) throw ValidationError("section index out of range");
      out[s.index_map[k]] = values[k];
    }
  }
  return out;
}

}  // namespace xbar
