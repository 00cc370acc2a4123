#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmx/classify.hpp"
#include "pmx/extraction.hpp"
#include "pmx/runtime.hpp"
#include "pmx/transform.hpp"

namespace pmx {

enum class Stage { Parsed, Typed, Lifted, Extracted, Classified, WellFormed };

// Every intermediate of the static pipeline that was reached.
struct Compilation {
  Stage reached = Stage::Parsed;
  Diagnostics diagnostics;

  ExprPtr typed;
  AccelSet accel;
  Lifted lifted;
  Extracted extracted;
  std::optional<BackendSplit> split;  // backend programs in ANF
  ExprPtr runProgram;                 // ANF of the lifted program
  AccelInfo info;

  bool ok() const { return diagnostics.empty() && reached == Stage::WellFormed; }
};

// parse, symbolize, typecheck, nesting check, rewrite, lift, extract,
// classify, ANF and well-formedness, stopping at the first failing stage.
Compilation compile(std::string_view source);

// One row per accelerate binding in program order.
struct ClassRow {
  std::string name;
  Span span;
  Verdict verdict;
  Counts counts;
};
std::vector<ClassRow> classificationTable(const Compilation& c);
std::string renderTable(const std::vector<ClassRow>& rows);

// Pretty-printed intermediate: lifted, extracted, anf, fut or cu.
// Returns nullopt for an unknown stage or one the compilation did not reach.
std::optional<std::string> dumpStage(const Compilation& c, std::string_view stage);

bool isDumpStage(std::string_view stage);

// Evaluates a compiled program. Requires c.ok().
RunResult runCompiled(const Compilation& c, const RunConfig& config);

}  // namespace pmx
