#pragma once

#include <map>
#include <set>

#include "pmx/ast.hpp"
#include "pmx/diagnostic.hpp"

namespace pmx {

// Identifiers of all accelerate bindings.
struct AccelSet {
  std::set<Name> idents;

  bool contains(const Name& n) const { return idents.count(n) != 0; }
};

// Empty when no accelerate expression is nested in another, directly or through
// functions reachable from an accelerate operand.
Diagnostics checkNoNestedAccelerate(const ExprPtr& e);

struct Rewritten {
  ExprPtr program;
  AccelSet accel;
};

// `accelerate e` becomes `let a = e in a` for a fresh a.
Rewritten rewriteAccelerate(const ExprPtr& e);

struct Lifted {
  ExprPtr program;
  // Number of leading parameters each accelerate binding gained (at least 1).
  std::map<Name, int> accelArity;
};

// Lifts every function and accelerate binding to the top of the program.
// Captured variables become leading parameters, applied at every reference.
Lifted lambdaLift(const ExprPtr& e, const AccelSet& accel);

// A-normal form. Function arguments of parallel constructs and builtin
// higher-order functions stay in place when they are a variable or an application.
ExprPtr toANF(const ExprPtr& e);

// Peels a chain of lambdas: `lam x. lam y. e` gives ({x, y} nodes, e).
std::pair<std::vector<const Lam*>, ExprPtr> lamChain(const ExprPtr& e);

}  // namespace pmx
