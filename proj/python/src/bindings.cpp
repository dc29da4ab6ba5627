#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "xbar/error.hpp"
#include "xbar/report.hpp"
#include "xbar/rng.hpp"
#include "xbar/stuck_sim.hpp"

namespace py = pybind11;
using namespace xbar;

namespace {

BitMatrix to_matrix(const std::vector<std::vector<int>>& rows) {
  BitMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw ValidationError("ragged bit matrix");
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (rows[r][c] != 0 && rows[r][c] != 1) throw ValidationError("bit matrix cells must be 0 or 1");
      m.set(r, c, static_cast<std::uint8_t>(rows[r][c]));
    }
  }
  return m;
}

std::vector<std::vector<int>> from_matrix(const BitMatrix& m) {
  std::vector<std::vector<int>> out(m.rows(), std::vector<int>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m.at(r, c);
  }
  return out;
}

ScaleRule make_rule(const std::string& kind, std::optional<double> value) {
  if (kind == "per-section") return ScaleRule::per_section();
  if (kind == "global") return ScaleRule::global(value.value_or(-1.0));
  if (kind == "fixed") {
    if (!value) throw ValidationError("fixed scale needs a value");
    return ScaleRule::fixed(*value);
  }
  throw ValidationError("unknown scale rule: " + kind);
}

report::RunConfig make_config(const py::kwargs& kw) {
  report::RunConfig c;
  for (auto [k, v] : kw) {
    const auto key = k.cast<std::string>();
    if (key == "manifest") c.manifest = v.cast<std::string>();
    else if (key == "rows") c.geometry.rows = v.cast<std::size_t>();
    else if (key == "bits") c.geometry.bits = v.cast<std::size_t>();
    else if (key == "slots") c.geometry.slots_per_row = v.cast<std::size_t>();
    else if (key == "order") c.order = parse_order(v.cast<std::string>());
    else if (key == "crossbars") c.crossbars = v.cast<std::size_t>();
    else if (key == "stride") {
      const auto s = v.cast<std::string>();
      if (s == "1") c.stride = SchedulePolicy::stride_one;
      else if (s == "L") c.stride = SchedulePolicy::stride_L;
      else throw ValidationError("stride must be 1 or L");
    } else if (key == "p") c.policy.p = v.cast<double>();
    else if (key == "stuck_cols") c.policy.stuck_columns = v.cast<std::vector<std::size_t>>();
    else if (key == "seed") c.policy.seed = v.cast<std::uint64_t>();
    else if (key == "permanent") c.policy.permanent = v.cast<bool>();
    else if (key == "scale") {
      const auto s = v.cast<std::string>();
      if (s == "per-section") c.scale = ScaleRule::Kind::per_section_max;
      else if (s == "global") c.scale = ScaleRule::Kind::global_max;
      else throw ValidationError("scale must be per-section or global");
    } else if (key == "include_initial") c.include_initial = v.cast<bool>();
    else if (key == "costs") c.costs = v.cast<std::vector<std::uint64_t>>();
    else if (key == "shuffles") c.shuffles = v.cast<std::size_t>();
    else if (key == "sweep_p") c.sweep_p = v.cast<std::vector<double>>();
    else if (key == "sweep_bits") c.sweep_bits = v.cast<std::vector<double>>();
    else if (key == "eval_batch") c.eval_batch = v.cast<std::size_t>();
    else throw ValidationError("unknown config key: " + key);
  }
  c.validate();
  return c;
}

template <nlohmann::json (*Command)(const report::RunConfig&)>
std::string run_report(const std::string& format, const py::kwargs& kw) {
  return report::render(Command(make_config(kw)), report::parse_format(format));
}

py::dict ledger_dict(const CostLedger& l) {
  py::dict d;
  d["total_switches"] = l.total_switches;
  d["per_column"] = l.per_column;
  d["excluded_initial"] = l.excluded_initial;
  py::list steps;
  for (const auto& s : l.per_step) steps.append(py::make_tuple(s.step, s.section, s.switches));
  d["per_step"] = steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_xbar, m) {
  m.doc() = "Bit-sliced crossbar reprogramming simulator";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  (void)base;

  py::class_<WeightTensor>(m, "WeightTensor")
      .def(py::init([](std::string name, std::vector<std::uint64_t> dims, std::vector<float> data) {
             WeightTensor t{std::move(name), std::move(dims), std::move(data)};
             t.validate();
             return t;
           }),
           py::arg("name"), py::arg("dims"), py::arg("data"))
      .def_readwrite("name", &WeightTensor::name)
      .def_readwrite("dims", &WeightTensor::dims)
      .def_readwrite("data", &WeightTensor::data)
      .def("element_count", &WeightTensor::element_count)
      .def("__eq__", [](const WeightTensor& a, const WeightTensor& b) { return a == b; });

  m.def("encode_tensor", [](const WeightTensor& t) {
    const auto bytes = encode_tensor(t);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def(
      "decode_tensor",
      [](py::bytes b, std::string name) {
        const std::string s = b;
        return decode_tensor({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, std::move(name));
      },
      py::arg("data"), py::arg("name") = "");
  m.def("read_tensor", [](const std::filesystem::path& p) { return read_tensor(p); });
  m.def("write_tensor", [](const WeightTensor& t, const std::filesystem::path& p) { write_tensor(t, p); });
  m.def("load_manifest", [](const std::filesystem::path& p) {
    py::list out;
    for (const auto& e : load_manifest(p).entries) {
      py::dict d;
      d["name"] = e.name;
      d["role"] = std::string(to_string(e.role));
      d["path"] = e.path.string();
      d["dims"] = e.dims;
      out.append(d);
    }
    return out;
  });

  py::class_<CrossbarGeometry>(m, "CrossbarGeometry")
      .def(py::init([](std::size_t rows, std::size_t bits, std::size_t slots) {
             CrossbarGeometry g{rows, bits, slots};
             g.validate();
             return g;
           }),
           py::arg("rows") = 128, py::arg("bits") = 10, py::arg("slots_per_row") = 1)
      .def_readonly("rows", &CrossbarGeometry::rows)
      .def_readonly("bits", &CrossbarGeometry::bits)
      .def_readonly("slots_per_row", &CrossbarGeometry::slots_per_row)
      .def_property_readonly("capacity", &CrossbarGeometry::capacity)
      .def_property_readonly("columns", &CrossbarGeometry::columns);

  m.def(
      "quantize",
      [](std::vector<float> w, std::size_t bits, const std::string& scale, std::optional<double> value) {
        const auto q = quantize(w, bits, make_rule(scale, value));
        std::vector<int> signs(q.signs.begin(), q.signs.end());
        return py::make_tuple(q.magnitudes, signs, q.scale);
      },
      py::arg("weights"), py::arg("bits"), py::arg("scale") = "per-section", py::arg("value") = py::none());

  py::class_<SlicedSection>(m, "SlicedSection")
      .def_property_readonly("bits", [](const SlicedSection& s) { return from_matrix(s.bits); })
      .def_property_readonly("signs", [](const SlicedSection& s) { return std::vector<int>(s.signs.begin(), s.signs.end()); })
      .def_readonly("scale", &SlicedSection::scale)
      .def_property_readonly("index_map", [](const SlicedSection& s) {
        py::list out;
        for (auto i : s.index_map) out.append(i == kPadSlot ? py::object(py::none()) : py::int_(i));
        return out;
      })
      .def_readonly("pad_count", &SlicedSection::pad_count)
      .def_readonly("geometry", &SlicedSection::geometry)
      .def("reconstruct", [](const SlicedSection& s) { return reconstruct(s); })
      .def("reconstruct_from", [](const SlicedSection& s, const std::vector<std::vector<int>>& state) {
        return reconstruct(s, to_matrix(state));
      });

  m.def(
      "slice_section",
      [](std::vector<float> w, const CrossbarGeometry& g, const std::string& scale, std::optional<double> value) {
        return slice_section(w, g, make_rule(scale, value));
      },
      py::arg("weights"), py::arg("geometry") = CrossbarGeometry{}, py::arg("scale") = "per-section",
      py::arg("value") = py::none());

  py::class_<SectionPlan>(m, "SectionPlan")
      .def_property_readonly("order", [](const SectionPlan& p) { return std::string(to_string(p.order)); })
      .def_readonly("section_size", &SectionPlan::section_size)
      .def_readonly("sections", &SectionPlan::sections)
      .def_readonly("permutation", &SectionPlan::permutation);

  m.def(
      "build_plan",
      [](std::vector<float> w, std::size_t size, const std::string& order) {
        return build_plan(w, size, parse_order(order));
      },
      py::arg("weights"), py::arg("section_size"), py::arg("order") = "sorted");
  m.def(
      "materialize",
      [](const SectionPlan& plan, std::vector<float> w, const CrossbarGeometry& g, const std::string& scale,
         std::optional<double> value) { return materialize(plan, w, g, make_rule(scale, value)); },
      py::arg("plan"), py::arg("weights"), py::arg("geometry") = CrossbarGeometry{}, py::arg("scale") = "per-section",
      py::arg("value") = py::none());
  m.def("column_activity", [](const std::vector<SlicedSection>& s) { return column_activity(s); });

  m.def(
      "reprogram_cost",
      [](const std::vector<std::vector<int>>& from, const std::vector<std::vector<int>>& to, std::size_t bits) {
        const auto c = reprogram_cost(to_matrix(from), to_matrix(to), bits);
        return py::make_tuple(c.total, c.per_column);
      },
      py::arg("from_bits"), py::arg("to_bits"), py::arg("bits") = 0);

  py::class_<ReprogramPlan>(m, "ReprogramPlan")
      .def_readonly("crossbars", &ReprogramPlan::crossbars)
      .def_property_readonly("policy", [](const ReprogramPlan& p) { return std::string(to_string(p.policy)); })
      .def_readonly("assignments", &ReprogramPlan::assignments)
      .def("section_count", &ReprogramPlan::section_count);

  m.def("plan_stride_L", py::overload_cast<std::size_t, std::size_t>(&plan_stride_L));
  m.def("plan_stride_one", py::overload_cast<std::size_t, std::size_t>(&plan_stride_one));
  m.def("plan_unsorted_baseline", &plan_unsorted_baseline);
  m.def(
      "evaluate_plan",
      [](ReprogramPlan plan, const std::vector<SlicedSection>& s, bool include_initial) {
        const auto ev = evaluate_plan(plan, s, std::nullopt, SequenceOptions{include_initial});
        py::dict d;
        d["total_switches"] = ev.total_switches;
        py::list ledgers;
        for (const auto& l : ev.ledgers) ledgers.append(ledger_dict(l));
        d["ledgers"] = ledgers;
        d["jobs"] = plan_jobs(plan);
        return d;
      },
      py::arg("plan"), py::arg("sections"), py::arg("include_initial") = true);
  m.def("switch_speedup", &switch_speedup);

  py::class_<RoundSchedule>(m, "RoundSchedule")
      .def_readonly("lanes", &RoundSchedule::lanes)
      .def_readonly("round_times", &RoundSchedule::round_times)
      .def_readonly("makespan", &RoundSchedule::makespan)
      .def_readonly("serial_time", &RoundSchedule::serial_time)
      .def_property_readonly("rounds",
                             [](const RoundSchedule& r) {
                               std::vector<std::vector<std::size_t>> ids;
                               for (const auto& round : r.rounds) {
                                 auto& out = ids.emplace_back();
                                 for (const auto& j : round) out.push_back(j.id);
                               }
                               return ids;
                             })
      .def("speedup", &RoundSchedule::speedup);
  m.def("greedy_rounds", [](std::vector<std::uint64_t> c, std::size_t lanes) { return greedy_rounds(c, lanes); });
  m.def("random_rounds", [](std::vector<std::uint64_t> c, std::size_t lanes, std::uint64_t seed) {
    return random_rounds(c, lanes, seed);
  });

  m.def(
      "run_schedule",
      [](const ReprogramPlan& plan, const std::vector<SlicedSection>& s, double p, std::vector<std::size_t> cols,
         std::uint64_t seed, bool permanent, bool include_initial) {
        StuckPolicy policy;
        policy.p = p;
        policy.stuck_columns = std::move(cols);
        policy.seed = seed;
        policy.permanent = permanent;
        ScheduleOptions options;
        options.include_initial = include_initial;
        const auto run = run_schedule(plan, s, policy, options);
        py::dict d;
        d["performed"] = run.performed;
        d["skipped"] = run.skipped;
        d["skipped_per_column"] = run.skipped_per_column;
        d["reference_switches"] = run.reference_switches;
        d["speedup"] = run.speedup;
        std::vector<std::vector<std::vector<int>>> programmed;
        for (const auto& img : run.state.programmed) programmed.push_back(from_matrix(img));
        d["programmed"] = programmed;
        return d;
      },
      py::arg("plan"), py::arg("sections"), py::arg("p") = 1.0, py::arg("stuck_columns") = std::vector<std::size_t>{0},
      py::arg("seed") = 0, py::arg("permanent") = false, py::arg("include_initial") = true);

  m.def("gaussian_weights", &gaussian_weights, py::arg("count"), py::arg("seed"), py::arg("stddev") = 1.0);

  m.def("analyze", &run_report<&report::analyze>, py::arg("format") = "json");
  m.def("plan", &run_report<&report::plan>, py::arg("format") = "json");
  m.def("balance", &run_report<&report::balance>, py::arg("format") = "json");
  m.def("simulate", &run_report<&report::simulate>, py::arg("format") = "json");
  m.def("sweep", &run_report<&report::sweep>, py::arg("format") = "json");
}
