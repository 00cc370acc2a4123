#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pmx/builtins.hpp"
#include "pmx/types.hpp"

namespace pmx {

struct Span {
  int line = 0;
  int col = 0;

  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

// An identifier. uid 0 means "not yet symbolized"; such names compare by text.
struct Name {
  std::string text;
  std::uint64_t uid = 0;

  friend bool operator==(const Name& a, const Name& b) {
    return a.uid == b.uid && (a.uid != 0 || a.text == b.text);
  }
  friend bool operator<(const Name& a, const Name& b) {
    if (a.uid != b.uid) return a.uid < b.uid;
    return a.uid == 0 && a.text < b.text;
  }
};

struct NameHash {
  std::size_t operator()(const Name& n) const noexcept;
};

// Allocates a name with a process-wide unique uid (thread-safe).
Name freshName(std::string text);

// Literal or builtin constant.
struct Const {
  std::variant<std::int64_t, double, bool, char32_t, Builtin> value;

  static Const integer(std::int64_t v) { return {v}; }
  static Const floating(double v) { return {v}; }
  static Const boolean(bool v) { return {v}; }
  static Const character(char32_t v) { return {v}; }
  static Const builtin(Builtin b) { return {b}; }

  bool isBuiltin() const { return std::holds_alternative<Builtin>(value); }
  friend bool operator==(const Const&, const Const&) = default;
};

struct Pattern;
using PatternPtr = std::shared_ptr<const Pattern>;

struct PVar {
  Name name;
};
struct PConst {
  Const value;
};
struct PRecord {
  std::vector<std::pair<std::string, PatternPtr>> fields;
};

struct Pattern {
  std::variant<PVar, PConst, PRecord> node;
  Span span;
  std::optional<Type> type;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Var {
  Name name;
};
struct Lit {
  Const value;
};
struct Lam {
  Name param;
  std::optional<Type> paramType;
  ExprPtr body;
};
struct App {
  ExprPtr fn;
  ExprPtr arg;
};
struct Let {
  Name name;
  std::optional<Type> annot;
  ExprPtr bound;
  ExprPtr body;
};
struct Binding {
  Name name;
  std::optional<Type> annot;
  ExprPtr body;
  Span span;
};
struct RecLets {
  std::vector<Binding> bindings;
  ExprPtr body;
};
struct Match {
  ExprPtr target;
  PatternPtr pat;
  ExprPtr thn;
  ExprPtr els;
};
struct Never {};
struct RecordLit {
  std::vector<std::pair<std::string, ExprPtr>> fields;
};
struct SeqLit {
  std::vector<ExprPtr> elems;
};
struct Accelerate {
  ExprPtr body;
};
struct Map {
  ExprPtr fn;
  ExprPtr seq;
};
struct Map2 {
  ExprPtr fn;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Reduce {
  ExprPtr fn;
  ExprPtr acc;
  ExprPtr seq;
};
struct Flatten {
  ExprPtr seq;
};
struct Loop {
  ExprPtr count;
  ExprPtr fn;
};

using ExprNode = std::variant<Var, Lit, Lam, App, Let, RecLets, Match, Never, RecordLit, SeqLit,
                              Accelerate, Map, Map2, Reduce, Flatten, Loop>;

struct Expr {
  ExprNode node;
  Span span;
  std::optional<Type> type;  // populated by the type checker
};

template <class T>
const T* as(const ExprPtr& e) {
  return e ? std::get_if<T>(&e->node) : nullptr;
}
template <class T>
bool is(const ExprPtr& e) {
  return as<T>(e) != nullptr;
}

inline ExprPtr mk(ExprNode node, Span span, std::optional<Type> type = std::nullopt) {
  return std::make_shared<const Expr>(Expr{std::move(node), span, std::move(type)});
}
inline PatternPtr mkPat(std::variant<PVar, PConst, PRecord> node, Span span,
                        std::optional<Type> type = std::nullopt) {
  return std::make_shared<const Pattern>(Pattern{std::move(node), span, std::move(type)});
}

// Same node with a different ExprNode payload, keeping span and type.
ExprPtr withNode(const ExprPtr& e, ExprNode node);

// Rebuilds e with f applied to every direct child expression. Binders are untouched.
template <class F>
ExprPtr mapChildren(const ExprPtr& e, F&& f);

// Calls f on every direct child expression.
template <class F>
void forEachChild(const Expr& e, F&& f);

// Application spine: `h a1 ... an` -> (h, [a1..an]).
std::pair<ExprPtr, std::vector<ExprPtr>> appSpine(const ExprPtr& e);

// Rebuilds a curried application, typing each intermediate node from the head's arrow type.
ExprPtr mkApps(ExprPtr head, const std::vector<ExprPtr>& args, Span span);

// The unit value `{}`.
ExprPtr mkUnit(Span span);

// Structural equality up to consistent renaming of bound names. Node types are ignored.
bool alphaEqual(const ExprPtr& a, const ExprPtr& b);

// Total node count (handy for tests and statistics).
std::size_t countNodes(const ExprPtr& e);

template <class F>
void forEachChild(const Expr& e, F&& f) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Lam>) {
          f(n.body);
        } else if constexpr (std::is_same_v<T, App>) {
          f(n.fn);
          f(n.arg);
        } else if constexpr (std::is_same_v<T, Let>) {
          f(n.bound);
          f(n.body);
        } else if constexpr (std::is_same_v<T, RecLets>) {
          for (const auto& b : n.bindings) f(b.body);
          f(n.body);
        } else if constexpr (std::is_same_v<T, Match>) {
          f(n.target);
          f(n.thn);
          f(n.els);
        } else if constexpr (std::is_same_v<T, RecordLit>) {
          for (const auto& [_, v] : n.fields) f(v);
        } else if constexpr (std::is_same_v<T, SeqLit>) {
          for (const auto& v : n.elems) f(v);
        } else if constexpr (std::is_same_v<T, Accelerate>) {
          f(n.body);
        } else if constexpr (std::is_same_v<T, Map>) {
          f(n.fn);
          f(n.seq);
        } else if constexpr (std::is_same_v<T, Map2>) {
          f(n.fn);
          f(n.lhs);
          f(n.rhs);
        } else if constexpr (std::is_same_v<T, Reduce>) {
          f(n.fn);
          f(n.acc);
          f(n.seq);
        } else if constexpr (std::is_same_v<T, Flatten>) {
          f(n.seq);
        } else if constexpr (std::is_same_v<T, Loop>) {
          f(n.count);
          f(n.fn);
        }
      },
      e.node);
}

template <class F>
ExprPtr mapChildren(const ExprPtr& e, F&& f) {
  ExprNode out = std::visit(
      [&](const auto& n) -> ExprNode {
        using T = std::decay_t<decltype(n)>;
        T c = n;
        if constexpr (std::is_same_v<T, Lam>) {
          c.body = f(n.body);
        } else if constexpr (std::is_same_v<T, App>) {
          c.fn = f(n.fn);
          c.arg = f(n.arg);
        } else if constexpr (std::is_same_v<T, Let>) {
          c.bound = f(n.bound);
          c.body = f(n.body);
        } else if constexpr (std::is_same_v<T, RecLets>) {
          for (auto& b : c.bindings) b.body = f(b.body);
          c.body = f(n.body);
        } else if constexpr (std::is_same_v<T, Match>) {
          c.target = f(n.target);
          c.thn = f(n.thn);
          c.els = f(n.els);
        } else if constexpr (std::is_same_v<T, RecordLit>) {
          for (auto& [_, v] : c.fields) v = f(v);
        } else if constexpr (std::is_same_v<T, SeqLit>) {
          for (auto& v : c.elems) v = f(v);
        } else if constexpr (std::is_same_v<T, Accelerate>) {
          c.body = f(n.body);
        } else if constexpr (std::is_same_v<T, Map>) {
          c.fn = f(n.fn);
          c.seq = f(n.seq);
        } else if constexpr (std::is_same_v<T, Map2>) {
          c.fn = f(n.fn);
          c.lhs = f(n.lhs);
          c.rhs = f(n.rhs);
        } else if constexpr (std::is_same_v<T, Reduce>) {
          c.fn = f(n.fn);
          c.acc = f(n.acc);
          c.seq = f(n.seq);
        } else if constexpr (std::is_same_v<T, Flatten>) {
          c.seq = f(n.seq);
        } else if constexpr (std::is_same_v<T, Loop>) {
          c.count = f(n.count);
          c.fn = f(n.fn);
        }
        return c;
      },
      e->node);
  return withNode(e, std::move(out));
}

}  // namespace pmx
