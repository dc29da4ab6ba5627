#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "xbar/cost_model.hpp"
#include "xbar/sws.hpp"

namespace xbar {

enum class SchedulePolicy { stride_one, stride_L, unsorted_baseline };

std::string_view to_string(SchedulePolicy policy);

/// Assignment of section ids (positions in a section list) to L crossbars.
struct ReprogramPlan {
  std::size_t crossbars = 1;
  SchedulePolicy policy = SchedulePolicy::stride_one;
  std::vector<std::vector<std::size_t>> assignments;
  std::vector<CostLedger> ledgers;  // filled by evaluate_plan

  std::size_t section_count() const;
  /// Throws unless every id in [0, section_count()) appears exactly once.
  void validate() const;
};

/// Crossbar c visits c, c+L, c+2L, ...
ReprogramPlan plan_stride_L(std::size_t section_count, std::size_t crossbars);
ReprogramPlan plan_stride_L(const SectionPlan& plan, std::size_t crossbars);

/// Crossbar c visits the c-th contiguous block; the first S mod L blocks
/// take one extra section.
ReprogramPlan plan_stride_one(std::size_t section_count, std::size_t crossbars);
ReprogramPlan plan_stride_one(const SectionPlan& plan, std::size_t crossbars);

/// Stride-L interleaving over a plan built in original order.
ReprogramPlan plan_unsorted_baseline(const SectionPlan& plan, std::size_t crossbars);

struct PlanEvaluation {
  std::vector<CostLedger> ledgers;
  std::uint64_t total_switches = 0;
  double speedup = 1.0;  // reference total / this total
};

/// Ratio of switch totals with 0/0 read as 1.
double switch_speedup(std::uint64_t reference, std::uint64_t measured);

// Costs each crossbar's visit list from an erased start and stores the ledgers
// in `plan`. Without a reference total the plan is compared with itself.
PlanEvaluation evaluate_plan(ReprogramPlan& plan, std::span<const SlicedSection> sections,
                             std::optional<std::uint64_t> reference_total = std::nullopt,
                             SequenceOptions options = {});

/// Per-step switch counts of an evaluated plan, crossbar by crossbar.
std::vector<std::uint64_t> plan_jobs(const ReprogramPlan& plan);

struct Job {
  std::size_t id = 0;
  std::uint64_t cost = 0;
};

/// Barrier-synchronized rounds of at most L concurrent jobs; a round lasts
/// as long as its costliest job.
struct RoundSchedule {
  std::size_t lanes = 1;
  std::vector<std::vector<Job>> rounds;
  std::vector<std::uint64_t> round_times;
  std::uint64_t makespan = 0;
  std::uint64_t serial_time = 0;

  double speedup() const;
};

/// Groups jobs, in the given order, into consecutive rounds of `lanes`.
RoundSchedule chunk_rounds(std::span<const Job> ordered, std::size_t lanes);

/// Sorts by cost descending (ties: lower id first), then chunks.
RoundSchedule greedy_rounds(std::span<const std::uint64_t> costs, std::size_t lanes);

/// Seeded shuffle, then chunks.
RoundSchedule random_rounds(std::span<const std::uint64_t> costs, std::size_t lanes, std::uint64_t seed);

}  // namespace xbar
