#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "xbar/bitslice.hpp"
#include "xbar/cost_model.hpp"
#include "xbar/scheduler.hpp"
#include "xbar/sws.hpp"

namespace xbar {

/// Which required switches get skipped.
struct StuckPolicy {
  double p = 1.0;                               // fraction of stuck-column switches performed
  std::vector<std::size_t> stuck_columns{0};    // bit significances, 0 = lowest order
  std::uint64_t seed = 0;
  // Skipped cells never switch again (instead of being re-drawn at the next
  // reprogramming event).
  bool permanent = false;
  // Apply the policy to the first programming of an erased crossbar too.
  bool stuck_initial = false;

  void validate(std::size_t bits) const;
  bool is_stuck(std::size_t bit) const;
};

struct StuckOutcome {
  BitMatrix state;
  SwitchCount performed;
  SwitchCount skipped;
};

// Moves `state` toward `target`. Columns outside stuck_columns switch every
// mismatched cell. For each stuck significance with k mismatched cells,
// exactly round(p * k) of them, drawn uniformly without replacement from a
// stream seeded by `event_seed`, switch; the rest keep their stale value.
// `frozen`, when given, marks cells that may not switch and receives the
// cells skipped by this event.
StuckOutcome reprogram_with_stucking(const BitMatrix& state, const SlicedSection& target,
                                     const StuckPolicy& policy, std::uint64_t event_seed,
                                     BitMatrix* frozen = nullptr);

/// Single event seeded with policy.seed.
StuckOutcome reprogram_with_stucking(const BitMatrix& state, const SlicedSection& target,
                                     const StuckPolicy& policy);

struct CrossbarState {
  BitMatrix cells;
  std::vector<std::uint32_t> switch_counts;  // per memristor, cumulative
  BitMatrix frozen;                          // only used in permanent mode
  CostLedger ledger;
};

struct SimState {
  std::vector<CrossbarState> crossbars;
  // Crossbar image right after each section id was programmed; this is what
  // inference on that section actually reads.
  std::vector<BitMatrix> programmed;
};

struct StepEvent {
  std::size_t crossbar = 0;
  std::size_t step = 0;
  std::size_t section = 0;
  const BitMatrix& before;
  const StuckOutcome& outcome;
};

struct ScheduleOptions {
  bool include_initial = true;
  std::function<void(const StepEvent&)> observer;
};

struct ScheduleRun {
  SimState state;
  std::vector<CostLedger> ledgers;
  std::uint64_t performed = 0;
  std::uint64_t skipped = 0;
  std::vector<std::uint64_t> skipped_per_column;
  std::uint64_t reference_switches = 0;  // same plan at p = 1
  double speedup = 1.0;
};

/// Event seed for step `step` of crossbar `crossbar`.
std::uint64_t event_seed(const StuckPolicy& policy, std::size_t crossbar, std::size_t step);

// Walks every crossbar's visit list from an erased state, carrying stale cells
// forward. Unless policy.stuck_initial is set, the first programming of each
// crossbar is exact.
ScheduleRun run_schedule(const ReprogramPlan& plan, std::span<const SlicedSection> sections,
                         const StuckPolicy& policy, const ScheduleOptions& options = {});

/// Flat weights as read back from the programmed crossbar images.
std::vector<double> realized_weights(std::span<const SlicedSection> sections,
                                     std::span<const BitMatrix> programmed, std::size_t weight_count);

struct LinearError {
  double rmse = 0.0;
  double max_abs = 0.0;
  double top1_agreement = 1.0;
};

// Compares y = W_hat x against y* = W x for every row x of `inputs`
// (batch x in, row-major), with W of shape out x in. top1_agreement is the
// fraction of rows where the two argmax indices match (ties: lowest index).
LinearError eval_linear_error(std::span<const double> realized, std::span<const float> reference,
                              std::size_t out_features, std::size_t in_features,
                              std::span<const float> inputs, std::size_t batch);

/// Row-major matrix product y = W x for each input row.
std::vector<double> linear_outputs(std::span<const double> weights, std::size_t out_features,
                                   std::size_t in_features, std::span<const float> inputs,
                                   std::size_t batch);

/// One weight matrix with its evaluation batch.
struct LinearLayer {
  std::span<const float> weights;
  std::size_t out_features = 1;
  std::size_t in_features = 1;
  std::span<const float> inputs;
  std::size_t batch = 0;
};

struct ExperimentConfig {
  CrossbarGeometry geometry;
  SectionOrder order = SectionOrder::sorted;
  std::size_t crossbars = 1;
  SchedulePolicy stride = SchedulePolicy::stride_one;
  StuckPolicy policy;
  ScaleRule scale = ScaleRule::per_section();
  bool include_initial = true;
};

struct ExperimentResult {
  std::size_t sections = 0;
  std::uint64_t performed = 0;
  std::uint64_t skipped = 0;
  std::uint64_t reference_switches = 0;
  std::vector<std::uint64_t> performed_per_column;
  std::vector<std::uint64_t> skipped_per_column;
  double speedup = 1.0;
  LinearError error;            // stale crossbars vs float weights
  LinearError quantized_error;  // exact programming vs float weights
  std::uint64_t seed = 0;
};

/// Sections, schedules and simulates one layer end to end.
ExperimentResult run_experiment(const LinearLayer& layer, const ExperimentConfig& config);

enum class SweepAxis { p, bits };

std::string_view to_string(SweepAxis axis);

struct SweepRow {
  SweepAxis axis = SweepAxis::p;
  double value = 0.0;
  ExperimentResult result;
};

/// One experiment per grid value, in grid order, all with config.policy.seed.
std::vector<SweepRow> sweep(const LinearLayer& layer, const ExperimentConfig& config, SweepAxis axis,
                            std::span<const double> grid);

}  // namespace xbar
