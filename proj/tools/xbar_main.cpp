// xbar: crossbar reprogramming planner and bit-stucking simulator.
//
//   xbar gen      --out DIR [--layer NAME:OUTxIN ...] [--seed S] [--eval-batch N]
//   xbar analyze  --manifest M [common flags]
//   xbar plan     --manifest M [common flags]
//   xbar balance  (--manifest M | --costs 9,8,2,1) [--shuffles N] [common flags]
//   xbar simulate --manifest M [common flags]
//   xbar sweep    --manifest M (--sweep-p 0,0.5,1 | --sweep-bits 6,8,10) [common flags]
//
// Exit codes: 0 success, 2 config/validation error, 3 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "xbar/error.hpp"
#include "xbar/report.hpp"
#include "xbar/rng.hpp"
#include "xbar/tensor_store.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Flags {
  std::string manifest;
  std::size_t rows = 128;
  std::size_t bits = 10;
  std::size_t slots = 1;
  std::string order = "sorted";
  std::size_t crossbars = 1;
  std::string stride = "1";
  double p = 1.0;
  std::vector<std::size_t> stuck_cols{0};
  std::uint64_t seed = 0;
  std::string scale = "per-section";
  std::string include_initial = "true";
  std::string format = "json";
  std::string out;
  bool permanent = false;
  std::vector<std::uint64_t> costs;
  std::size_t shuffles = 1;
  std::vector<double> sweep_p;
  std::vector<double> sweep_bits;
  std::size_t eval_batch = 16;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--manifest", f.manifest, "Tensor manifest (name<TAB>role<TAB>path)");
  cmd->add_option("--rows", f.rows, "Crossbar rows")->capture_default_str();
  cmd->add_option("--bits", f.bits, "Power-of-two columns per weight")->capture_default_str();
  cmd->add_option("--slots", f.slots, "Weights per crossbar row")->capture_default_str();
  cmd->add_option("--order", f.order, "Section order")->check(CLI::IsMember({"sorted", "original"}))->capture_default_str();
  cmd->add_option("--crossbars", f.crossbars, "Number of programmable crossbars L")->capture_default_str();
  cmd->add_option("--stride", f.stride, "Scheduling stride")->check(CLI::IsMember({"1", "L"}))->capture_default_str();
  cmd->add_option("--p", f.p, "Fraction of stuck-column switches performed")->capture_default_str();
  cmd->add_option("--stuck-cols", f.stuck_cols, "Stuck bit columns (0 = lowest order)")->delimiter(',')->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--scale", f.scale, "Quantization scale rule")->check(CLI::IsMember({"per-section", "global"}))->capture_default_str();
  cmd->add_option("--include-initial", f.include_initial, "Count the first programming of each crossbar")
      ->check(CLI::IsMember({"true", "false"}))
      ->capture_default_str();
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd->add_option("--out", f.out, "Write the report here instead of stdout");
  cmd->add_flag("--permanent", f.permanent, "Skipped cells stay stuck for good");
  cmd->add_option("--eval-batch", f.eval_batch, "Synthetic eval rows when the manifest has none")->capture_default_str();
}

xbar::report::RunConfig to_config(const Flags& f) {
  xbar::report::RunConfig c;
  c.manifest = f.manifest;
  c.geometry = {f.rows, f.bits, f.slots};
  c.order = xbar::parse_order(f.order);
  c.crossbars = f.crossbars;
  c.stride = f.stride == "1" ? xbar::SchedulePolicy::stride_one : xbar::SchedulePolicy::stride_L;
  c.policy.p = f.p;
  c.policy.stuck_columns = f.stuck_cols;
  c.policy.seed = f.seed;
  c.policy.permanent = f.permanent;
  c.scale = f.scale == "global" ? xbar::ScaleRule::Kind::global_max : xbar::ScaleRule::Kind::per_section_max;
  c.include_initial = f.include_initial == "true";
  c.format = xbar::report::parse_format(f.format);
  c.costs = f.costs;
  c.shuffles = f.shuffles;
  c.sweep_p = f.sweep_p;
  c.sweep_bits = f.sweep_bits;
  c.eval_batch = f.eval_batch;
  return c;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw xbar::IoError("cannot open " + out + " for writing");
  file << text;
  if (!file) throw xbar::IoError("failed writing " + out);
}

struct GenFlags {
  std::string out;
  std::vector<std::string> layers{"fc1:256x512", "fc2:64x256"};
  std::uint64_t seed = 0;
  std::size_t eval_batch = 32;
  double stddev = 1.0;
};

// Writes seeded Gaussian weight matrices, one eval batch per input width,
// and a manifest tying them together.
void generate(const GenFlags& g) {
  namespace fs = std::filesystem;
  if (g.out.empty()) throw xbar::ValidationError("--out is required");
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw xbar::IoError("cannot create " + g.out + ": " + ec.message());

  xbar::Manifest manifest;
  std::vector<std::uint64_t> widths;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const auto& spec = g.layers[i];
    const auto colon = spec.find(':');
    const auto x = spec.find('x', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || x == std::string::npos || colon == 0) {
      throw xbar::ValidationError("layer spec '" + spec + "' is not NAME:OUTxIN");
    }
    xbar::WeightTensor t;
    t.name = spec.substr(0, colon);
    try {
      t.dims = {std::stoull(spec.substr(colon + 1, x - colon - 1)), std::stoull(spec.substr(x + 1))};
    } catch (const std::exception&) {
      throw xbar::ValidationError("layer spec '" + spec + "' has non-numeric dims");
    }
    t.data = xbar::gaussian_weights(t.element_count(), xbar::derive_seed(g.seed, i), g.stddev);
    const auto path = fs::path(g.out) / (t.name + ".cbwt");
    xbar::write_tensor(t, path);
    manifest.entries.push_back({t.name, xbar::TensorRole::weights, path, t.dims});
    if (std::find(widths.begin(), widths.end(), t.dims[1]) == widths.end()) widths.push_back(t.dims[1]);
  }
  for (std::size_t i = 0; g.eval_batch > 0 && i < widths.size(); ++i) {
    xbar::WeightTensor x;
    x.name = "input_" + std::to_string(widths[i]);
    x.dims = {g.eval_batch, widths[i]};
    x.data = xbar::gaussian_weights(x.element_count(), xbar::derive_seed(g.seed, 0xba7c4, i));
    const auto path = fs::path(g.out) / (x.name + ".cbwt");
    xbar::write_tensor(x, path);
    manifest.entries.push_back({x.name, xbar::TensorRole::eval_input, path, x.dims});
  }
  xbar::write_manifest(manifest, fs::path(g.out) / "manifest.tsv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crossbar reprogramming planner and bit-stucking simulator"};
  app.require_subcommand(1);

  Flags f;
  GenFlags g;

  auto* gen = app.add_subcommand("gen", "Write seeded Gaussian tensors and a manifest");
  gen->add_option("--out", g.out, "Output directory")->required();
  gen->add_option("--layer", g.layers, "Layer as NAME:OUTxIN (repeatable)");
  gen->add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  gen->add_option("--eval-batch", g.eval_batch, "Rows of each eval input batch")->capture_default_str();
  gen->add_option("--std", g.stddev, "Weight standard deviation")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Column activity and weight statistics");
  auto* plan = app.add_subcommand("plan", "Schedule sections onto crossbars and count switches");
  auto* balance = app.add_subcommand("balance", "Compare greedy and random round grouping");
  auto* simulate = app.add_subcommand("simulate", "Run a schedule with bit stucking");
  auto* sweep = app.add_subcommand("sweep", "Sweep p or the bit width");
  for (auto* cmd : {analyze, plan, balance, simulate, sweep}) add_common(cmd, f);
  balance->add_option("--costs", f.costs, "Raw job costs instead of a manifest")->delimiter(',');
  balance->add_option("--shuffles", f.shuffles, "Random groupings to compare (seeds seed..seed+N-1)")->capture_default_str();
  sweep->add_option("--sweep-p", f.sweep_p, "Grid of p values")->delimiter(',');
  sweep->add_option("--sweep-bits", f.sweep_bits, "Grid of bit widths")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      generate(g);
      return 0;
    }
    const auto config = to_config(f);
    nlohmann::json report;
    if (*analyze) report = xbar::report::analyze(config);
    else if (*plan) report = xbar::report::plan(config);
    else if (*balance) report = xbar::report::balance(config);
    else if (*simulate) report = xbar::report::simulate(config);
    else report = xbar::report::sweep(config);
    emit(xbar::report::render(report, config.format), f.out);
  } catch (const xbar::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const xbar::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
