#pragma once

#include <map>
#include <set>
#include <string_view>

#include "pmx/ast.hpp"
#include "pmx/diagnostic.hpp"
#include "pmx/transform.hpp"

namespace pmx {

enum class Verdict { Any, Futhark, Cuda, Invalid };

std::string_view verdictName(Verdict v);

// Occurrences of map/map2/reduce/flatten, and of loop, over all subexpressions.
int countFutharkExprs(const ExprPtr& e);
int countCudaExprs(const ExprPtr& e);

struct Counts {
  int fut = 0;
  int cu = 0;
};

// Counts for x and every binding reachable from it through free variables,
// each binding counted once.
Counts transitiveCounts(const Name& x, const std::map<Name, ExprPtr>& bodies);

Verdict classifyCounts(Counts c);
Verdict classifyBinding(const Name& x, const std::map<Name, ExprPtr>& bodies);

// Bodies (bound expressions) of the top-level bindings of a let chain.
std::map<Name, ExprPtr> bindingBodies(const ExprPtr& program);
std::map<Name, Span> bindingSpans(const ExprPtr& program);

struct BackendSplit {
  std::set<Name> futIdents;
  std::set<Name> cuIdents;
  ExprPtr futProgram;
  ExprPtr cuProgram;
  std::map<Name, Verdict> verdicts;
  std::map<Name, Counts> counts;
};

// Classifies every accelerate binding of eAcc and extracts one program per backend.
// Any and Invalid bindings are reported together.
Outcome<BackendSplit> splitBackends(const AccelSet& acc, const ExprPtr& eAcc);

}  // namespace pmx
