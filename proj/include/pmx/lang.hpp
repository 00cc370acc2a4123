#pragma once

#include <map>
#include <string>
#include <string_view>

#include "pmx/ast.hpp"
#include "pmx/diagnostic.hpp"

namespace pmx {

// Parses a `.pmx` program. Builtin names parse to builtin constants; `e.l`
// desugars to `match e with {l = x} then x else never`; `if c then a else b`
// desugars to `match c with true then a else b`.
Outcome<ExprPtr> parse(std::string_view source);

// Gives every binder a fresh uid and resolves each use to its binder.
Outcome<ExprPtr> symbolize(const ExprPtr& e);

// Monomorphic unification-based inference. On success every node (and every
// pattern) carries a ground type.
Outcome<ExprPtr> typecheck(const ExprPtr& e);

// Deterministic concrete syntax; `parse(prettyPrint(e))` is alpha-equivalent to e.
// Distinct binders that share a text get `#k` suffixes.
std::string prettyPrint(const ExprPtr& e);

// The text prettyPrint uses for every binder and free variable of e.
std::map<Name, std::string> printedNames(const ExprPtr& e);

// parse + symbolize + typecheck.
Outcome<ExprPtr> frontend(std::string_view source);

}  // namespace pmx
