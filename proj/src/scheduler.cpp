#include "xbar/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "xbar/error.hpp"
#include "xbar/rng.hpp"

namespace xbar {
namespace {

void check_counts(std::size_t sections, std::size_t crossbars) {
  if (crossbars == 0) throw ValidationError("need at least one crossbar");
  if (sections == 0) throw ValidationError("need at least one section");
  if (crossbars > sections) {
    throw ValidationError(std::to_string(crossbars) + " crossbars exceed " + std::to_string(sections) +
                          " sections");
  }
}

}  // namespace

std::string_view to_string(SchedulePolicy policy) {
  switch (policy) {
    case SchedulePolicy::stride_one: return "stride_one";
    case SchedulePolicy::stride_L: return "stride_L";
    case SchedulePolicy::unsorted_baseline: return "unsorted_baseline";
  }
  return "stride_one";
}

std::size_t ReprogramPlan::section_count() const {
  std::size_t n = 0;
  for (const auto& a : assignments) n += a.size();
  return n;
}

void ReprogramPlan::validate() const {
  if (assignments.size() != crossbars) throw ValidationError("plan has wrong number of crossbar lists");
  const auto n = section_count();
  std::vector<bool> seen(n, false);
  for (const auto& list : assignments) {
    for (auto id : list) {
      if (id >= n || seen[id]) throw ValidationError("plan does not cover each section exactly once");
      seen[id] = true;
    }
  }
}

ReprogramPlan plan_stride_L(std::size_t section_count, std::size_t crossbars) {
  check_counts(section_count, crossbars);
  ReprogramPlan plan;
  plan.crossbars = crossbars;
  plan.policy = SchedulePolicy::stride_L;
  plan.assignments.resize(crossbars);
  for (std::size_t id = 0; id < section_count; ++id) plan.assignments[id % crossbars].push_back(id);
  return plan;
}

ReprogramPlan plan_stride_L(const SectionPlan& plan, std::size_t crossbars) {
  return plan_stride_L(plan.section_count(), crossbars);
}

ReprogramPlan plan_stride_one(std::size_t section_count, std::size_t crossbars) {
  check_counts(section_count, crossbars);
  ReprogramPlan plan;
  plan.crossbars = crossbars;
  plan.policy = SchedulePolicy::stride_one;
  plan.assignments.resize(crossbars);
  const std::size_t base = section_count / crossbars;
  const std::size_t extra = section_count % crossbars;
  std::size_t next = 0;
  for (std::size_t c = 0; c < crossbars; ++c) {
    const std::size_t len = base + (c < extra ? 1 : 0);
    for (std::size_t k = 0; k < len; ++k) plan.assignments[c].push_back(next++);
  }
  return plan;
}

ReprogramPlan plan_stride_one(const SectionPlan& plan, std::size_t crossbars) {
  return plan_stride_one(plan.section_count(), crossbars);
}

ReprogramPlan plan_unsorted_baseline(const SectionPlan& plan, std::size_t crossbars) {
  if (plan.order != SectionOrder::original) {
    throw ValidationError("unsorted baseline needs a plan built in original order");
  }
  auto out = plan_stride_L(plan.section_count(), crossbars);
  out.policy = SchedulePolicy::unsorted_baseline;
  return out;
}

double switch_speedup(std::uint64_t reference, std::uint64_t measured) {
  if (measured == 0) {
    return reference == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(reference) / static_cast<double>(measured);
}

PlanEvaluation evaluate_plan(ReprogramPlan& plan, std::span<const SlicedSection> sections,
                             std::optional<std::uint64_t> reference_total, SequenceOptions options) {
  plan.validate();
  if (plan.section_count() != sections.size()) {
    throw ValidationError("plan covers " + std::to_string(plan.section_count()) + " sections but " +
                          std::to_string(sections.size()) + " were supplied");
  }
  PlanEvaluation eval;
  eval.ledgers.reserve(plan.crossbars);
  for (const auto& visit : plan.assignments) {
    eval.ledgers.push_back(sequence_cost(sections, visit, nullptr, options));
    eval.total_switches += eval.ledgers.back().total_switches;
  }
  eval.speedup = switch_speedup(reference_total.value_or(eval.total_switches), eval.total_switches);
  plan.ledgers = eval.ledgers;
  return eval;
}

std::vector<std::uint64_t> plan_jobs(const ReprogramPlan& plan) {
  if (plan.ledgers.size() != plan.assignments.size()) throw ValidationError("plan has not been evaluated");
  std::vector<std::uint64_t> jobs;
  for (const auto& ledger : plan.ledgers) {
    for (const auto& step : ledger.per_step) jobs.push_back(step.switches);
  }
  return jobs;
}

double RoundSchedule::speedup() const {
  if (makespan == 0) return 1.0;
  return static_cast<double>(serial_time) / static_cast<double>(makespan);
}

RoundSchedule chunk_rounds(std::span<const Job> ordered, std::size_t lanes) {
  if (lanes == 0) throw ValidationError("need at least one lane");
  RoundSchedule s;
  s.lanes = lanes;
  for (std::size_t start = 0; start < ordered.size(); start += lanes) {
    const auto end = std::min(ordered.size(), start + lanes);
    std::vector<Job> round(ordered.begin() + static_cast<std::ptrdiff_t>(start),
                           ordered.begin() + static_cast<std::ptrdiff_t>(end));
    std::uint64_t t = 0;
    for (const auto& j : round) {
      t = std::max(t, j.cost);
      s.serial_time += j.cost;
    }
    s.round_times.push_back(t);
    s.makespan += t;
    s.rounds.push_back(std::move(round));
  }
  return s;
}

namespace {

std::vector<Job> as_jobs(std::span<const std::uint64_t> costs) {
  if (costs.empty()) throw ValidationError("need at least one job");
  std::vector<Job> jobs(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) jobs[i] = {i, costs[i]};
  return jobs;
}

}  // namespace

RoundSchedule greedy_rounds(std::span<const std::uint64_t> costs, std::size_t lanes) {
  auto jobs = as_jobs(costs);
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.cost > b.cost; });
  return chunk_rounds(jobs, lanes);
}

RoundSchedule random_rounds(std::span<const std::uint64_t> costs, std::size_t lanes, std::uint64_t seed) {
  auto jobs = as_jobs(costs);
  Rng rng(seed);
  rng.shuffle(std::span<Job>(jobs));
  return chunk_rounds(jobs, lanes);
}

}  // namespace xbar
