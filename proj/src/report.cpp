#include "xbar/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xbar/error.hpp"
#include "xbar/rng.hpp"

namespace xbar::report {

using nlohmann::json;

namespace {

constexpr std::uint64_t kInputStream = 0x1a7e5;

std::string_view to_string(ScaleRule::Kind kind) {
  switch (kind) {
    case ScaleRule::Kind::per_section_max: return "per-section";
    case ScaleRule::Kind::global_max: return "global";
    case ScaleRule::Kind::explicit_scale: return "explicit";
  }
  return "per-section";
}

ScaleRule scale_rule(const RunConfig& c) {
  return c.scale == ScaleRule::Kind::global_max ? ScaleRule::global() : ScaleRule::per_section();
}

ExperimentConfig experiment_config(const RunConfig& c) {
  ExperimentConfig e;
  e.geometry = c.geometry;
  e.order = c.order;
  e.crossbars = c.crossbars;
  e.stride = c.stride;
  e.policy = c.policy;
  e.scale = scale_rule(c);
  e.include_initial = c.include_initial;
  return e;
}

json ledger_json(const CostLedger& ledger) {
  json steps = json::array();
  json visits = json::array();
  for (const auto& s : ledger.per_step) {
    steps.push_back(s.switches);
    visits.push_back(s.section);
  }
  return {{"visits", visits},
          {"switches", steps},
          {"per_column", ledger.per_column},
          {"total_switches", ledger.total_switches},
          {"excluded_initial", ledger.excluded_initial}};
}

json linear_error_json(const LinearError& e) {
  return {{"rmse", e.rmse}, {"max_abs", e.max_abs}, {"top1_agreement", e.top1_agreement}};
}

json rounds_json(const RoundSchedule& s) {
  return {{"makespan", s.makespan},
          {"serial_time", s.serial_time},
          {"speedup", s.speedup()},
          {"rounds", s.rounds.size()},
          {"round_times", s.round_times}};
}

json balance_json(std::span<const std::uint64_t> costs, const RunConfig& c) {
  const auto greedy = greedy_rounds(costs, c.crossbars);
  json randoms = json::array();
  for (std::size_t i = 0; i < c.shuffles; ++i) {
    const auto seed = c.policy.seed + i;
    auto r = rounds_json(random_rounds(costs, c.crossbars, seed));
    r["seed"] = seed;
    randoms.push_back(std::move(r));
  }
  return {{"jobs", costs.size()}, {"lanes", c.crossbars}, {"greedy", rounds_json(greedy)}, {"random", randoms}};
}

ReprogramPlan schedule_for(const SectionPlan& plan, const RunConfig& c) {
  return c.stride == SchedulePolicy::stride_one ? plan_stride_one(plan, c.crossbars)
                                                : plan_stride_L(plan, c.crossbars);
}

void flatten(const json& node, const std::string& path, std::ostringstream& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) flatten(value, path + "/" + key, out);
    return;
  }
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) flatten(node[i], path + "/" + std::to_string(i), out);
    return;
  }
  out << path << ',';
  if (node.is_string()) {
    const auto s = node.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) {
      out << s;
    } else {
      out << '"';
      for (char ch : s) out << (ch == '"' ? "\"\"" : std::string(1, ch));
      out << '"';
    }
  } else if (!node.is_null()) {
    out << node.dump();
  }
  out << '\n';
}

}  // namespace

void RunConfig::validate() const {
  geometry.validate();
  if (crossbars == 0) throw ValidationError("--crossbars must be at least 1");
  policy.validate(geometry.bits);
  if (shuffles == 0) throw ValidationError("--shuffles must be at least 1");
}

LinearLayer Layer::view() const {
  return {tensor.data, out_features, in_features, inputs, batch};
}

std::vector<Layer> load_layers(const RunConfig& config) {
  if (config.manifest.empty()) throw ValidationError("--manifest is required");
  const auto manifest = load_manifest(config.manifest);
  const auto weights = manifest.with_role(TensorRole::weights);
  if (weights.empty()) throw ValidationError("manifest lists no weights tensors");
  const auto inputs = manifest.with_role(TensorRole::eval_input);

  std::vector<Layer> layers;
  for (std::size_t li = 0; li < weights.size(); ++li) {
    Layer layer;
    layer.name = weights[li]->name;
    layer.tensor = read_tensor(weights[li]->path);
    layer.tensor.name = layer.name;
    const auto& dims = layer.tensor.dims;
    if (dims.size() == 1) {
      layer.out_features = 1;
      layer.in_features = dims[0];
    } else {
      layer.out_features = dims[0];
      layer.in_features = layer.tensor.data.size() / dims[0];
    }

    // First eval_input whose trailing width matches; else a seeded batch.
    for (const auto* entry : inputs) {
      if (entry->dims.back() != layer.in_features) continue;
      auto x = read_tensor(entry->path);
      layer.batch = x.data.size() / layer.in_features;
      layer.inputs = std::move(x.data);
      layer.input_source = entry->name;
      break;
    }
    if (layer.input_source.empty()) {
      layer.batch = config.eval_batch;
      layer.inputs = gaussian_weights(layer.batch * layer.in_features,
                                      derive_seed(config.policy.seed, kInputStream, li));
      layer.input_source = "synthetic";
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

json config_json(const RunConfig& c) {
  json cols = json::array();
  for (auto col : c.policy.stuck_columns) cols.push_back(col);
  return {{"manifest", c.manifest.generic_string()},
          {"rows", c.geometry.rows},
          {"bits", c.geometry.bits},
          {"slots", c.geometry.slots_per_row},
          {"order", std::string(to_string(c.order))},
          {"crossbars", c.crossbars},
          {"stride", c.stride == SchedulePolicy::stride_one ? "1" : "L"},
          {"p", c.policy.p},
          {"stuck_cols", cols},
          {"permanent", c.policy.permanent},
          {"seed", c.policy.seed},
          {"scale", std::string(to_string(c.scale))},
          {"include_initial", c.include_initial}};
}

Histogram summarize(std::span<const float> values) {
  Histogram h;
  if (values.empty()) return h;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  h.min = v.front();
  h.max = v.back();
  double sum = 0.0;
  for (double x : v) sum += x;
  h.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - h.mean) * (x - h.mean);
  h.stddev = std::sqrt(sq / static_cast<double>(v.size()));
  for (int k = 1; k <= 9; ++k) {
    const auto idx = static_cast<std::size_t>(std::floor(k / 10.0 * static_cast<double>(v.size() - 1)));
    h.deciles.push_back(v[idx]);
  }
  return h;
}

json analyze(const RunConfig& c) {
  c.validate();
  const auto layers = load_layers(c);
  json out_layers = json::array();
  std::vector<SlicedSection> pooled;
  for (const auto& layer : layers) {
    const auto plan = build_plan(layer.tensor.data, c.geometry.capacity(), c.order);
    auto sections = materialize(plan, layer.tensor.data, c.geometry, scale_rule(c));
    const auto h = summarize(layer.tensor.data);
    out_layers.push_back({{"name", layer.name},
                          {"dims", layer.tensor.dims},
                          {"weights", layer.tensor.data.size()},
                          {"sections", sections.size()},
                          {"activity", column_activity(sections)},
                          {"histogram",
                           {{"min", h.min}, {"max", h.max}, {"mean", h.mean}, {"std", h.stddev}, {"deciles", h.deciles}}}});
    std::move(sections.begin(), sections.end(), std::back_inserter(pooled));
  }
  return {{"command", "analyze"},
          {"config", config_json(c)},
          {"layers", out_layers},
          {"activity", column_activity(pooled)},
          {"sections", pooled.size()}};
}

json plan(const RunConfig& c) {
  c.validate();
  const auto layers = load_layers(c);
  json out_layers = json::array();
  std::uint64_t total = 0;
  std::uint64_t baseline_total = 0;
  const SequenceOptions opts{c.include_initial};
  for (const auto& layer : layers) {
    const auto& w = layer.tensor.data;
    const auto sorted_plan = build_plan(w, c.geometry.capacity(), c.order);
    const auto sections = materialize(sorted_plan, w, c.geometry, scale_rule(c));
    const auto unsorted_plan = build_plan(w, c.geometry.capacity(), SectionOrder::original);
    const auto unsorted = materialize(unsorted_plan, w, c.geometry, scale_rule(c));

    auto baseline = plan_unsorted_baseline(unsorted_plan, c.crossbars);
    const auto base_eval = evaluate_plan(baseline, unsorted, std::nullopt, opts);

    auto schedule = schedule_for(sorted_plan, c);
    const auto eval = evaluate_plan(schedule, sections, base_eval.total_switches, opts);

    auto one = plan_stride_one(sorted_plan, c.crossbars);
    auto strided = plan_stride_L(sorted_plan, c.crossbars);
    const auto one_total = evaluate_plan(one, sections, std::nullopt, opts).total_switches;
    const auto strided_total = evaluate_plan(strided, sections, std::nullopt, opts).total_switches;

    json crossbars = json::array();
    for (std::size_t x = 0; x < schedule.crossbars; ++x) {
      auto j = ledger_json(schedule.ledgers[x]);
      j["crossbar"] = x;
      crossbars.push_back(std::move(j));
    }
    out_layers.push_back({{"name", layer.name},
                          {"sections", sections.size()},
                          {"policy", std::string(to_string(schedule.policy))},
                          {"crossbars", crossbars},
                          {"total_switches", eval.total_switches},
                          {"baseline_total_switches", base_eval.total_switches},
                          {"speedup_vs_baseline", eval.speedup},
                          {"stride_totals", {{"stride_1", one_total}, {"stride_L", strided_total}}}});
    total += eval.total_switches;
    baseline_total += base_eval.total_switches;
  }
  return {{"command", "plan"},
          {"config", config_json(c)},
          {"layers", out_layers},
          {"total_switches", total},
          {"baseline_total_switches", baseline_total},
          {"speedup_vs_baseline", switch_speedup(baseline_total, total)}};
}

json balance(const RunConfig& c) {
  c.validate();
  json out = {{"command", "balance"}, {"config", config_json(c)}};
  if (!c.costs.empty()) {
    out["source"] = "costs";
    out["layers"] = json::array({balance_json(c.costs, c)});
    out["layers"][0]["name"] = "costs";
    return out;
  }
  out["source"] = "manifest";
  json out_layers = json::array();
  for (const auto& layer : load_layers(c)) {
    const auto& w = layer.tensor.data;
    const auto sorted_plan = build_plan(w, c.geometry.capacity(), c.order);
    const auto sections = materialize(sorted_plan, w, c.geometry, scale_rule(c));
    auto schedule = schedule_for(sorted_plan, c);
    evaluate_plan(schedule, sections, std::nullopt, SequenceOptions{c.include_initial});
    auto j = balance_json(plan_jobs(schedule), c);
    j["name"] = layer.name;
    out_layers.push_back(std::move(j));
  }
  out["layers"] = out_layers;
  return out;
}

json simulate(const RunConfig& c) {
  c.validate();
  const auto cfg = experiment_config(c);
  json out_layers = json::array();
  std::uint64_t performed = 0;
  std::uint64_t reference = 0;
  std::uint64_t baseline = 0;
  for (const auto& layer : load_layers(c)) {
    const auto r = run_experiment(layer.view(), cfg);

    const auto& w = layer.tensor.data;
    const auto unsorted_plan = build_plan(w, c.geometry.capacity(), SectionOrder::original);
    const auto unsorted = materialize(unsorted_plan, w, c.geometry, scale_rule(c));
    auto base = plan_unsorted_baseline(unsorted_plan, c.crossbars);
    const auto base_total = evaluate_plan(base, unsorted, std::nullopt, SequenceOptions{c.include_initial}).total_switches;

    out_layers.push_back({{"name", layer.name},
                          {"sections", r.sections},
                          {"performed", r.performed},
                          {"skipped", r.skipped},
                          {"performed_per_column", r.performed_per_column},
                          {"skipped_per_column", r.skipped_per_column},
                          {"reference_switches", r.reference_switches},
                          {"baseline_switches", base_total},
                          {"speedup_vs_exact", r.speedup},
                          {"speedup_vs_baseline", switch_speedup(base_total, r.performed)},
                          {"error", linear_error_json(r.error)},
                          {"quantized_error", linear_error_json(r.quantized_error)},
                          {"input_source", layer.input_source},
                          {"seed", r.seed}});
    performed += r.performed;
    reference += r.reference_switches;
    baseline += base_total;
  }
  return {{"command", "simulate"},
          {"config", config_json(c)},
          {"layers", out_layers},
          {"performed", performed},
          {"reference_switches", reference},
          {"baseline_switches", baseline},
          {"speedup_vs_exact", switch_speedup(reference, performed)},
          {"speedup_vs_baseline", switch_speedup(baseline, performed)}};
}

json sweep(const RunConfig& c) {
  c.validate();
  if (c.sweep_p.empty() && c.sweep_bits.empty()) throw ValidationError("sweep needs --sweep-p or --sweep-bits");
  const auto cfg = experiment_config(c);
  json rows = json::array();
  for (const auto& layer : load_layers(c)) {
    const auto view = layer.view();
    for (auto [axis, grid] : {std::pair{SweepAxis::p, &c.sweep_p}, std::pair{SweepAxis::bits, &c.sweep_bits}}) {
      if (grid->empty()) continue;
      for (const auto& row : xbar::sweep(view, cfg, axis, *grid)) {
        const auto& r = row.result;
        rows.push_back({{"layer", layer.name},
                        {"axis", std::string(to_string(axis))},
                        {"value", row.value},
                        {"seed", r.seed},
                        {"speedup", r.speedup},
                        {"performed", r.performed},
                        {"reference_switches", r.reference_switches},
                        {"performed_column0", r.performed_per_column.at(0)},
                        {"rmse", r.error.rmse},
                        {"max_abs", r.error.max_abs},
                        {"top1_agreement", r.error.top1_agreement}});
      }
    }
  }
  return {{"command", "sweep"}, {"config", config_json(c)}, {"rows", rows}};
}

std::string render(const json& report, ReportFormat format) {
  if (format == ReportFormat::json) return report.dump(2) + "\n";
  std::ostringstream out;
  out << "path,value\n";
  flatten(report, "", out);
  return out.str();
}

ReportFormat parse_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  throw ValidationError("unknown report format '" + std::string(text) + "'");
}

}  // namespace xbar::report
