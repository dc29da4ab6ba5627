#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbar/bitslice.hpp"
#include "xbar/scheduler.hpp"
#include "xbar/stuck_sim.hpp"
#include "xbar/sws.hpp"
#include "xbar/tensor_store.hpp"

namespace xbar::report {

enum class ReportFormat { json, csv };

struct RunConfig {
  std::filesystem::path manifest;
  CrossbarGeometry geometry;  // 128 rows, 10 bits, 1 slot per row
  SectionOrder order = SectionOrder::sorted;
  std::size_t crossbars = 1;
  SchedulePolicy stride = SchedulePolicy::stride_one;
  StuckPolicy policy;
  ScaleRule::Kind scale = ScaleRule::Kind::per_section_max;
  bool include_initial = true;
  ReportFormat format = ReportFormat::json;

  std::vector<std::uint64_t> costs;  // balance on a raw cost list
  std::size_t shuffles = 1;          // random groupings compared in balance
  std::vector<double> sweep_p;
  std::vector<double> sweep_bits;
  std::size_t eval_batch = 16;       // synthetic inputs when the manifest has none

  void validate() const;
};

/// A weights tensor viewed as an out x in matrix, plus its eval batch.
struct Layer {
  std::string name;
  WeightTensor tensor;
  std::size_t out_features = 1;
  std::size_t in_features = 1;
  std::vector<float> inputs;
  std::size_t batch = 0;
  std::string input_source;

  LinearLayer view() const;
};

/// Weights-role tensors of the manifest, in manifest order.
std::vector<Layer> load_layers(const RunConfig& config);

nlohmann::json config_json(const RunConfig& config);

nlohmann::json analyze(const RunConfig& config);
nlohmann::json plan(const RunConfig& config);
nlohmann::json balance(const RunConfig& config);
nlohmann::json simulate(const RunConfig& config);
nlohmann::json sweep(const RunConfig& config);

// JSON: keys sorted, two-space indent. CSV: header `path,value`, one row per
// scalar leaf in document order, path written as a JSON pointer.
std::string render(const nlohmann::json& report, ReportFormat format);

ReportFormat parse_format(std::string_view text);

/// Summary statistics used by analyze.
struct Histogram {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> deciles;  // 10th .. 90th percentile, nearest rank
};

Histogram summarize(std::span<const float> values);

}  // namespace xbar::report
