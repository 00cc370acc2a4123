#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pmx/cli.hpp"
#include "pmx/pipeline.hpp"

namespace py = pybind11;
using namespace pmx;

namespace {

py::object toPython(const Value& v) {
  if (v.is<std::int64_t>()) return py::int_(v.get<std::int64_t>());
  if (v.is<double>()) return py::float_(v.get<double>());
  if (v.is<bool>()) return py::bool_(v.get<bool>());
  if (v.is<char32_t>()) return py::str(stringOf(makeSeq({v})));
  if (v.is<Unit>()) return py::dict();
  if (v.is<SeqPtr>()) {
    const auto& elems = v.get<SeqPtr>()->elems;
    bool text = !elems.empty();
    for (const auto& e : elems) text = text && e.is<char32_t>();
    if (text) return py::str(stringOf(v));
    py::list out;
    for (const auto& e : elems) out.append(toPython(e));
    return out;
  }
  if (v.is<RecordPtr>()) {
    py::dict out;
    for (const auto& [label, f] : v.get<RecordPtr>()->fields) out[py::str(label)] = toPython(f);
    return out;
  }
  if (v.is<TensorPtr>()) {
    const auto& t = *v.get<TensorPtr>();
    py::list data;
    for (std::size_t i = 0; i < t.size(); ++i) data.append(toPython(tensorElement(t, i)));
    py::dict out;
    out["shape"] = t.shape;
    out["data"] = data;
    return out;
  }
  return py::str(show(v));
}

std::vector<std::string> rendered(const Diagnostics& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(render(d, "<source>"));
  return out;
}

py::dict check(const std::string& source) {
  Compilation c = compile(source);
  py::list table;
  for (const auto& r : classificationTable(c)) {
    py::dict row;
    row["binding"] = r.name;
    row["line"] = r.span.line;
    row["col"] = r.span.col;
    row["verdict"] = std::string(verdictName(r.verdict));
    row["p_fut"] = r.counts.fut;
    row["p_cu"] = r.counts.cu;
    table.append(row);
  }
  py::dict out;
  out["ok"] = c.ok();
  out["diagnostics"] = rendered(c.diagnostics);
  out["table"] = table;
  return out;
}

std::string dump(const std::string& source, const std::string& stage) {
  if (!isDumpStage(stage)) throw py::value_error("unknown stage " + stage);
  Compilation c = compile(source);
  auto text = dumpStage(c, stage);
  if (!text) throw py::value_error("stage " + stage + " not reached:\n" + rendered(c.diagnostics).front());
  return *text;
}

py::dict run(const std::string& source, const std::string& mode, int workers, int maxRank, bool checkDeterminism,
             std::optional<bool> runtimeChecks) {
  Compilation c = compile(source);
  if (!c.ok()) {
    std::string msg;
    for (const auto& d : rendered(c.diagnostics)) msg += d + "\n";
    throw py::value_error(msg);
  }
  if (mode != "debug" && mode != "accel") throw py::value_error("mode must be debug or accel");
  std::ostringstream printed;
  RunConfig cfg;
  cfg.mode = mode == "accel" ? Mode::Accel : Mode::Debug;
  cfg.workers = std::max(1, workers);
  cfg.maxRank = maxRank;
  cfg.checkDeterminism = checkDeterminism;
  cfg.runtimeChecks = runtimeChecks;
  cfg.out = &printed;
  RunResult r;
  {
    py::gil_scoped_release release;
    r = runCompiled(c, cfg);
  }
  py::dict out;
  out["output"] = printed.str();
  out["value"] = toPython(r.value);
  out["warnings"] = r.warnings;
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> mergeIntervals(
    const std::vector<std::pair<std::int64_t, std::int64_t>>& in) {
  std::vector<Interval> iv;
  for (const auto& [s, e] : in) iv.push_back({s, e});
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& i : mergeOverlappingIntervals(iv)) out.emplace_back(i.start, i.end);
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = runCli(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_pmx, m) {
  m.doc() = "Compiler pipeline and simulated accelerator runtime for pmx programs";
  py::register_exception<RuntimeError>(m, "PmxRuntimeError");
  m.def("check", &check, py::arg("source"), "Run every static stage; returns ok, diagnostics and the verdict table.");
  m.def("dump", &dump, py::arg("source"), py::arg("stage"), "Pretty-printed intermediate program.");
  m.def("run", &run, py::arg("source"), py::arg("mode") = "debug", py::arg("workers") = 1, py::arg("max_rank") = 3,
        py::arg("check_determinism") = false, py::arg("runtime_checks") = py::none(),
        "Compile and evaluate; returns printed output, final value and warnings.");
  m.def("merge_intervals", &mergeIntervals, py::arg("intervals"), "Merge overlapping half-open intervals.");
  m.def("cli", &cli, py::arg("args"), "Run the command line; returns (exit code, stdout, stderr).");
}
