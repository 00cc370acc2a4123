#include "pmx/pipeline.hpp"

#include <sstream>

#include "pmx/lang.hpp"
#include "pmx/wellformed.hpp"

namespace pmx {

Compilation compile(std::string_view source) {
  Compilation c;
  auto parsed = parse(source);
  if (!parsed) {
    c.diagnostics = parsed.diagnostics();
    return c;
  }
  auto sym = symbolize(*parsed);
  if (!sym) {
    c.diagnostics = sym.diagnostics();
    return c;
  }
  auto typed = typecheck(*sym);
  if (!typed) {
    c.diagnostics = typed.diagnostics();
    return c;
  }
  c.typed = *typed;
  c.reached = Stage::Typed;

  c.diagnostics = checkNoNestedAccelerate(c.typed);
  if (!c.diagnostics.empty()) return c;
  Rewritten rw = rewriteAccelerate(c.typed);
  c.accel = rw.accel;
  c.lifted = lambdaLift(rw.program, c.accel);
  c.runProgram = toANF(c.lifted.program);
  c.info.arity = c.lifted.accelArity;
  c.reached = Stage::Lifted;

  c.extracted = extract(c.accel.idents, c.lifted.program);
  c.reached = Stage::Extracted;

  auto split = splitBackends(c.accel, c.extracted.program);
  if (!split) {
    c.diagnostics = split.diagnostics();
    return c;
  }
  BackendSplit s = *split;
  s.futProgram = toANF(s.futProgram);
  s.cuProgram = toANF(s.cuProgram);
  c.info.verdicts = s.verdicts;
  c.split = std::move(s);
  c.reached = Stage::Classified;

  c.diagnostics = checkWellFormed(*c.split);
  if (c.diagnostics.empty()) c.reached = Stage::WellFormed;
  return c;
}

std::vector<ClassRow> classificationTable(const Compilation& c) {
  std::vector<ClassRow> rows;
  if (!c.split) return rows;
  auto spans = bindingSpans(c.extracted.program);
  for (const auto& n : topLevelNames(c.extracted.program)) {
    auto it = c.split->verdicts.find(n);
    if (it == c.split->verdicts.end()) continue;
    rows.push_back({n.text, spans[n], it->second, c.split->counts.at(n)});
  }
  return rows;
}

std::string renderTable(const std::vector<ClassRow>& rows) {
  auto label = [](const ClassRow& r) {
    return r.name + "@" + std::to_string(r.span.line) + ":" + std::to_string(r.span.col);
  };
  std::size_t w = 7;
  for (const auto& r : rows) w = std::max(w, label(r).size());
  auto pad = [](std::string s, std::size_t n) {
    s.resize(std::max(n, s.size()), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("binding", w) << "  " << pad("verdict", 8) << "  P_fut  P_cu\n";
  for (const auto& r : rows) {
    out << pad(label(r), w) << "  " << pad(std::string(verdictName(r.verdict)), 8) << "  "
        << pad(std::to_string(r.counts.fut), 5) << "  " << r.counts.cu << "\n";
  }
  return out.str();
}

bool isDumpStage(std::string_view s) {
  return s == "lifted" || s == "extracted" || s == "anf" || s == "fut" || s == "cu";
}

std::optional<std::string> dumpStage(const Compilation& c, std::string_view stage) {
  if (stage == "lifted" && c.reached >= Stage::Lifted) return prettyPrint(c.lifted.program) + "\n";
  if (stage == "anf" && c.reached >= Stage::Lifted) return prettyPrint(c.runProgram) + "\n";
  if (stage == "extracted" && c.reached >= Stage::Extracted) {
    std::string head = "-- extracted:";
    auto shown = printedNames(c.extracted.program);
    for (const auto& n : topLevelNames(c.extracted.program)) head += " " + shown.at(n);
    return head + "\n" + prettyPrint(c.extracted.program) + "\n";
  }
  if (stage == "fut" && c.split) return prettyPrint(c.split->futProgram) + "\n";
  if (stage == "cu" && c.split) return prettyPrint(c.split->cuProgram) + "\n";
  return std::nullopt;
}

RunResult runCompiled(const Compilation& c, const RunConfig& config) {
  return evaluate(c.runProgram, c.info, config);
}

}  // namespace pmx
