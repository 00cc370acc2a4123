#pragma once

#include <set>

#include "pmx/ast.hpp"

namespace pmx {

std::set<Name> freeVars(const ExprPtr& e);

// Names bound by a pattern.
void patternBinders(const PatternPtr& p, std::set<Name>& out);

struct Extracted {
  std::set<Name> idents;  // every extracted binding name
  ExprPtr program;        // the kept top-level bindings, ending in `{}`
};

// Keeps the top-level bindings of e transitively required by I, in order.
Extracted extract(const std::set<Name>& I, const ExprPtr& e);

// Top-level binding names of a let / recursive-let chain, in order.
std::vector<Name> topLevelNames(const ExprPtr& e);

}  // namespace pmx
