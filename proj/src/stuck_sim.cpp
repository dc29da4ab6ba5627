#include "xbar/stuck_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xbar/error.hpp"
#include "xbar/rng.hpp"

namespace xbar {

void StuckPolicy::validate(std::size_t bits) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("stuck probability p must lie in [0, 1]");
  for (auto c : stuck_columns) {
    if (c >= bits) {
      throw ValidationError("stuck column " + std::to_string(c) + " outside [0, " + std::to_string(bits) + ")");
    }
  }
}

bool StuckPolicy::is_stuck(std::size_t bit) const {
  return std::find(stuck_columns.begin(), stuck_columns.end(), bit) != stuck_columns.end();
}

StuckOutcome reprogram_with_stucking(const BitMatrix& state, const SlicedSection& target,
                                     const StuckPolicy& policy, std::uint64_t event_seed,
                                     BitMatrix* frozen) {
  const std::size_t bits = target.geometry.bits;
  if (!state.same_shape(target.bits)) throw ValidationError("state shape does not match target section");
  if (frozen && !frozen->same_shape(state)) throw ValidationError("frozen mask shape does not match state");
  policy.validate(bits);

  StuckOutcome out{state, {0, std::vector<std::uint64_t>(bits, 0)}, {0, std::vector<std::uint64_t>(bits, 0)}};
  auto cells = out.state.cells();
  const auto want = target.bits.cells();
  const std::size_t cols = state.cols();

  // Candidate cell offsets per stuck significance, in row-major order.
  std::vector<std::vector<std::size_t>> candidates(bits);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i] == want[i]) continue;
    const std::size_t j = (i % cols) % bits;
    if (!policy.is_stuck(j)) {
      cells[i] = want[i];
      ++out.performed.per_column[j];
    } else if (frozen && frozen->cells()[i]) {
      ++out.skipped.per_column[j];
    } else {
      candidates[j].push_back(i);
    }
  }

  Rng rng(event_seed);
  for (std::size_t j = 0; j < bits; ++j) {
    auto& pool = candidates[j];
    if (pool.empty()) continue;
    const auto take = static_cast<std::size_t>(std::round(policy.p * static_cast<double>(pool.size())));
    // Partial Fisher-Yates: the first `take` entries become a uniform sample.
    for (std::size_t k = 0; k < take; ++k) {
      const auto pick = k + static_cast<std::size_t>(rng.below(pool.size() - k));
      std::swap(pool[k], pool[pick]);
      cells[pool[k]] = want[pool[k]];
    }
    if (frozen) {
      for (std::size_t k = take; k < pool.size(); ++k) frozen->cells()[pool[k]] = 1;
    }
    out.performed.per_column[j] += take;
    out.skipped.per_column[j] += pool.size() - take;
  }

  for (std::size_t j = 0; j < bits; ++j) {
    out.performed.total += out.performed.per_column[j];
    out.skipped.total += out.skipped.per_column[j];
  }
  return out;
}

StuckOutcome reprogram_with_stucking(const BitMatrix& state, const SlicedSection& target,
                                     const StuckPolicy& policy) {
  return reprogram_with_stucking(state, target, policy, policy.seed, nullptr);
}

std::uint64_t event_seed(const StuckPolicy& policy, std::size_t crossbar, std::size_t step) {
  return derive_seed(policy.seed, crossbar, step);
}

namespace {

StuckPolicy exact_policy() {
  StuckPolicy p;
  p.p = 1.0;
  p.stuck_columns.clear();
  return p;
}

ScheduleRun simulate(const ReprogramPlan& plan, std::span<const SlicedSection> sections,
                     const StuckPolicy& policy, const ScheduleOptions& options) {
  plan.validate();
  if (plan.section_count() != sections.size()) {
    throw ValidationError("plan covers " + std::to_string(plan.section_count()) + " sections but " +
                          std::to_string(sections.size()) + " were supplied");
  }
  const auto& g = sections.front().geometry;
  for (const auto& s : sections) {
    if (!(s.geometry == g)) throw ValidationError("sections in a schedule must share geometry");
  }
  policy.validate(g.bits);
  const auto exact = exact_policy();

  ScheduleRun run;
  run.skipped_per_column.assign(g.bits, 0);
  run.state.programmed.resize(sections.size());
  run.state.crossbars.resize(plan.crossbars);

  for (std::size_t c = 0; c < plan.crossbars; ++c) {
    auto& xb = run.state.crossbars[c];
    xb.cells = BitMatrix(g.rows, g.columns());
    xb.switch_counts.assign(xb.cells.size(), 0);
    if (policy.permanent) xb.frozen = BitMatrix(g.rows, g.columns());
    xb.ledger.per_column.assign(g.bits, 0);

    const auto& visit = plan.assignments[c];
    for (std::size_t k = 0; k < visit.size(); ++k) {
      const auto id = visit[k];
      const bool initial = k == 0;
      const auto& use = (initial && !policy.stuck_initial) ? exact : policy;
      auto outcome = reprogram_with_stucking(xb.cells, sections[id], use, event_seed(policy, c, k),
                                             policy.permanent ? &xb.frozen : nullptr);

      const auto before = xb.cells.cells();
      const auto after = outcome.state.cells();
      for (std::size_t i = 0; i < before.size(); ++i) xb.switch_counts[i] += before[i] != after[i];

      const bool counted = !(initial && !options.include_initial);
      xb.ledger.record(id, outcome.performed, counted);
      if (counted) {
        run.performed += outcome.performed.total;
        run.skipped += outcome.skipped.total;
        for (std::size_t j = 0; j < g.bits; ++j) run.skipped_per_column[j] += outcome.skipped.per_column[j];
      }
      if (options.observer) options.observer(StepEvent{c, k, id, xb.cells, outcome});

      xb.cells = std::move(outcome.state);
      run.state.programmed[id] = xb.cells;
    }
    run.ledgers.push_back(xb.ledger);
  }
  return run;
}

}  // namespace

ScheduleRun run_schedule(const ReprogramPlan& plan, std::span<const SlicedSection> sections,
                         const StuckPolicy& policy, const ScheduleOptions& options) {
  if (sections.empty()) throw ValidationError("no sections to schedule");
  auto run = simulate(plan, sections, policy, options);

  StuckPolicy full = policy;
  full.p = 1.0;
  full.permanent = false;
  ScheduleOptions quiet;
  quiet.include_initial = options.include_initial;
  const auto reference = simulate(plan, sections, full, quiet);
  run.reference_switches = reference.performed;
  run.speedup = switch_speedup(run.reference_switches, run.performed);
  return run;
}

std::vector<double> realized_weights(std::span<const SlicedSection> sections,
                                     std::span<const BitMatrix> programmed, std::size_t weight_count) {
  if (programmed.size() != sections.size()) throw ValidationError("one programmed image per section required");
  std::vector<double> out(weight_count, 0.0);
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto values = reconstruct(sections[s], programmed[s]);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const auto idx = sections[s].index_map[k];
      if (idx >= weight_count) throw ValidationError("section index out of range");
      out[idx] = values[k];
    }
  }
  return out;
}

std::vector<double> linear_outputs(std::span<const double> weights, std::size_t out_features,
                                   std::size_t in_features, std::span<const float> inputs,
                                   std::size_t batch) {
  if (weights.size() != out_features * in_features) throw ValidationError("weight matrix size mismatch");
  if (inputs.size() != batch * in_features) throw ValidationError("input batch does not match in_features");
  std::vector<double> y(batch * out_features, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* x = inputs.data() + b * in_features;
    for (std::size_t o = 0; o < out_features; ++o) {
      const double* w = weights.data() + o * in_features;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_features; ++i) acc += w[i] * static_cast<double>(x[i]);
      y[b * out_features + o] = acc;
    }
  }
  return y;
}

LinearError eval_linear_error(std::span<const double> realized, std::span<const float> reference,
                              std::size_t out_features, std::size_t in_features,
                              std::span<const float> inputs, std::size_t batch) {
  if (realized.size() != reference.size()) throw ValidationError("realized and reference weights differ in size");
  const std::vector<double> exact(reference.begin(), reference.end());
  const auto y = linear_outputs(realized, out_features, in_features, inputs, batch);
  const auto y_ref = linear_outputs(exact, out_features, in_features, inputs, batch);

  LinearError err;
  if (batch == 0) return err;
  double sq = 0.0;
  std::size_t agree = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t arg = 0;
    std::size_t arg_ref = 0;
    for (std::size_t o = 0; o < out_features; ++o) {
      const auto i = b * out_features + o;
      const double d = y[i] - y_ref[i];
      sq += d * d;
      err.max_abs = std::max(err.max_abs, std::fabs(d));
      if (y[i] > y[b * out_features + arg]) arg = o;
      if (y_ref[i] > y_ref[b * out_features + arg_ref]) arg_ref = o;
    }
    agree += arg == arg_ref;
  }
  err.rmse = std::sqrt(sq / static_cast<double>(y.size()));
  err.top1_agreement = static_cast<double>(agree) / static_cast<double>(batch);
  return err;
}

ExperimentResult run_experiment(const LinearLayer& layer, const ExperimentConfig& config) {
  config.geometry.validate();
  const auto plan = build_plan(layer.weights, config.geometry.capacity(), config.order);
  const auto sections = materialize(plan, layer.weights, config.geometry, config.scale);
  const auto schedule = config.stride == SchedulePolicy::stride_one
                            ? plan_stride_one(plan, config.crossbars)
                            : plan_stride_L(plan, config.crossbars);

  ScheduleOptions options;
  options.include_initial = config.include_initial;
  const auto run = run_schedule(schedule, sections, config.policy, options);

  ExperimentResult r;
  r.sections = sections.size();
  r.performed = run.performed;
  r.skipped = run.skipped;
  r.reference_switches = run.reference_switches;
  r.skipped_per_column = run.skipped_per_column;
  r.performed_per_column.assign(config.geometry.bits, 0);
  for (const auto& ledger : run.ledgers) {
    for (std::size_t j = 0; j < ledger.per_column.size(); ++j) r.performed_per_column[j] += ledger.per_column[j];
  }
  r.speedup = run.speedup;
  r.seed = config.policy.seed;

  const auto n = layer.weights.size();
  const auto stale = realized_weights(sections, run.state.programmed, n);
  const auto exact = assemble_weights(sections, n);
  r.error = eval_linear_error(stale, layer.weights, layer.out_features, layer.in_features, layer.inputs, layer.batch);
  r.quantized_error =
      eval_linear_error(exact, layer.weights, layer.out_features, layer.in_features, layer.inputs, layer.batch);
  return r;
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::p ? "p" : "bits"; }

std::vector<SweepRow> sweep(const LinearLayer& layer, const ExperimentConfig& config, SweepAxis axis,
                            std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double v : grid) {
    auto cfg = config;
    if (axis == SweepAxis::p) {
      cfg.policy.p = v;
    } else {
      if (v < 1.0 || v != std::floor(v)) throw ValidationError("bit grid values must be positive integers");
      cfg.geometry.bits = static_cast<std::size_t>(v);
    }
    rows.push_back({axis, v, run_experiment(layer, cfg)});
  }
  return rows;
}

}  // namespace xbar
