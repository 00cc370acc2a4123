#include "pmx/wellformed.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <tuple>

#include "pmx/transform.hpp"

namespace pmx {
namespace {

// Persistent environment: extension shares the tail, callers never see it change.
class Env {
 public:
  Env() = default;

  Env extend(const Name& n, const Type& t) const {
    Env e;
    e.head_ = std::make_shared<const Node>(Node{n, t, head_});
    return e;
  }

  const Type* lookup(const Name& n) const {
    for (const Node* p = head_.get(); p; p = p->next.get()) {
      if (p->name == n) return &p->type;
    }
    return nullptr;
  }

 private:
  struct Node {
    Name name;
    Type type;
    std::shared_ptr<const Node> next;
  };
  std::shared_ptr<const Node> head_;
};

enum class Backend { Futhark, Cuda };

bool containsArrowIn(const Type& t, TypeKind container) {
  switch (t.kind()) {
    case TypeKind::Seq:
    case TypeKind::Tensor:
      if (t.kind() == container && t.elem().isArrow()) return true;
      return containsArrowIn(t.elem(), container);
    case TypeKind::Arrow:
      return containsArrowIn(t.param(), container) || containsArrowIn(t.result(), container);
    case TypeKind::Record:
      for (const auto& [_, f] : t.fields()) {
        if (container == TypeKind::Record && f.isArrow()) return true;
        if (containsArrowIn(f, container)) return true;
      }
      return false;
    default:
      return false;
  }
}

bool containsTensor(const Type& t) {
  switch (t.kind()) {
    case TypeKind::Tensor:
      return true;
    case TypeKind::Seq:
      return containsTensor(t.elem());
    case TypeKind::Arrow:
      return containsTensor(t.param()) || containsTensor(t.result());
    case TypeKind::Record:
      for (const auto& [_, f] : t.fields()) {
        if (containsTensor(f)) return true;
      }
      return false;
    default:
      return false;
  }
}

bool isTensorBuiltin(Builtin b) { return builtinInfo(b).tensor; }

bool isHofBuiltin(const ExprPtr& head) {
  const auto* l = as<Lit>(head);
  if (!l || !l->value.isBuiltin()) return false;
  Builtin b = std::get<Builtin>(l->value.value);
  return b == Builtin::Create || b == Builtin::Foldl || b == Builtin::TensorCreate;
}

class Checker {
 public:
  explicit Checker(Backend b) : backend_(b) {}

  Diagnostics run(const ExprPtr& program) {
    Env env;
    topLevel(program, env);
    return diags_;
  }

 private:
  Backend backend_;
  Diagnostics diags_;
  std::set<std::tuple<std::string, int, int>> seen_;

  bool cuda() const { return backend_ == Backend::Cuda; }

  void report(const std::string& rule, Span sp, const std::string& msg) {
    if (!seen_.emplace(rule, sp.line, sp.col).second) return;
    diags_.push_back({DiagKind::WellFormedError, rule, sp, msg});
  }

  // Type well-formedness at a binding site.
  void checkType(const Type& t, Span sp, const std::string& what) {
    if (containsArrowIn(t, TypeKind::Seq)) {
      report("WF-TX-Seq", sp, what + " has a sequence of functions: " + t.str());
    }
    if (containsArrowIn(t, TypeKind::Record)) {
      report("WF-TX-Rec", sp, what + " has a record containing a function: " + t.str());
    }
    if (!cuda() && containsTensor(t)) {
      report("WF-TF-Tensor", sp, what + " has a tensor type, which the Futhark backend does not support: " + t.str());
    }
  }

  // WF-BC-1 / WF-BC-2: first-order after peeling leading arrows.
  bool firstOrder(const Type& t, Span sp, const std::string& what) {
    if (!t.isArrow()) return true;  // WF-BC-1
    if (t.param().isArrow()) {
      report("WF-BC-2", sp, what + " takes a function-typed parameter (" + t.param().str() + ")");
      return false;
    }
    return firstOrder(t.result(), sp, what);
  }

  void topLevel(const ExprPtr& e, const Env& env) {
    if (const auto* l = as<Let>(e)) {
      binding(l->name, l->bound, e->span, env, false);
      topLevel(l->body, env.extend(l->name, *l->bound->type));
      return;
    }
    if (const auto* r = as<RecLets>(e)) {
      Env inner = env;
      for (const auto& b : r->bindings) inner = inner.extend(b.name, *b.body->type);  // WF-EC-Rec / WF-EF-Rec
      for (const auto& b : r->bindings) binding(b.name, b.body, b.span, inner, true);
      topLevel(r->body, inner);
      return;
    }
    expr(e, env);
  }

  void binding(const Name& n, const ExprPtr& bound, Span sp, const Env& env, bool recursive) {
    const Type& t = *bound->type;
    std::string what = "binding " + n.text;
    checkType(t, sp, what);
    if (is<Lam>(bound)) {
      function(n, bound, sp, env);
      return;
    }
    if (recursive) {
      report(cuda() ? "WF-EC-Let" : "WF-EF-Let", sp, "recursive binding " + n.text + " must be a function");
    }
    letValue(n, bound, sp, env);
  }

  void function(const Name& n, const ExprPtr& lam, Span sp, const Env& env) {
    const Type& t = *lam->type;
    std::string what = "function " + n.text;
    if (cuda()) {
      firstOrder(t, sp, what);
    } else {
      auto [params, result] = t.uncurry();
      for (const auto& p : params) {
        if (p.isArrow()) {
          report("WF-EF-HOF", sp, what + " takes a function-typed parameter (" + p.str() + ")");
          break;
        }
      }
    }
    auto [lams, body] = lamChain(lam);
    Env inner = env;
    ExprPtr cur = lam;
    for (const Lam* l : lams) {
      Type pt = cur->type->param();
      checkType(pt, cur->span, "parameter " + l->param.text);
      inner = inner.extend(l->param, pt);
      cur = l->body;
    }
    expr(body, inner);
  }

  void letValue(const Name& n, const ExprPtr& bound, Span sp, const Env& env) {
    const Type& t = *bound->type;
    if (t.isArrow()) {
      if (cuda()) {
        if (is<App>(bound)) {
          report("WF-EC-App", bound->span, "partial application bound to " + n.text + " has function type " + t.str());
        } else {
          report("WF-EC-Let", sp, "binding " + n.text + " stores a function value of type " + t.str());
        }
      } else {
        report("WF-EF-Let", sp, "binding " + n.text + " stores a function value of type " + t.str());
      }
      // The value itself is still checked, but its arrow result is already reported.
      if (const auto* a = as<App>(bound)) {
        appArgs(*a, bound, env);
        return;
      }
    }
    expr(bound, env);
  }

  void inner(const ExprPtr& e, const Env& env) {
    if (const auto* l = as<Let>(e)) {
      checkType(*l->bound->type, e->span, "binding " + l->name.text);
      if (is<Lam>(l->bound)) {
        function(l->name, l->bound, e->span, env);
      } else {
        letValue(l->name, l->bound, e->span, env);
      }
      expr(l->body, env.extend(l->name, *l->bound->type));
      return;
    }
    if (const auto* r = as<RecLets>(e)) {
      Env in = env;
      for (const auto& b : r->bindings) in = in.extend(b.name, *b.body->type);
      for (const auto& b : r->bindings) binding(b.name, b.body, b.span, in, true);
      expr(r->body, in);
      return;
    }
  }

  void var(const Name& n, Span sp, const Env& env) {
    if (!env.lookup(n)) report("WF-EX-Var", sp, "variable " + n.text + " is not defined in the accelerated code");
  }

  void constant(const Const& c, Span sp) {
    if (!c.isBuiltin()) return;
    Builtin b = std::get<Builtin>(c.value);
    const auto& info = builtinInfo(b);
    if (info.effectful) {
      report("WF-EX-Builtin", sp, "effectful builtin " + std::string(info.name) + " cannot run in accelerated code");
    }
    if (!cuda() && isTensorBuiltin(b)) {
      report("WF-EF-Tensor", sp, "tensor builtin " + std::string(info.name) + " is only supported by the CUDA backend");
    }
  }

  void atom(const ExprPtr& e, const Env& env) {
    if (const auto* v = as<Var>(e)) {
      var(v->name, e->span, env);
    } else if (const auto* l = as<Lit>(e)) {
      constant(l->value, e->span);
    } else {
      expr(e, env);
    }
  }

  void appArgs(const App&, const ExprPtr& e, const Env& env) {
    auto [head, args] = appSpine(e);
    bool hof = isHofBuiltin(head);
    atom(head, env);
    for (const auto& a : args) {
      if (a->type && a->type->isArrow()) {
        if (hof) {
          relaxed(a, env, cuda() ? "WF-HC" : "WF-HF", nullptr);
        } else if (cuda()) {
          report("WF-EC-App", a->span, "function-typed argument of type " + a->type->str());
        } else {
          report("WF-EF-HOF", a->span, "function-typed argument of type " + a->type->str());
        }
        continue;
      }
      atom(a, env);
    }
  }

  // The relaxed relation for function arguments of parallel constructs: a
  // variable, a builtin, or an application of one to well-formed arguments.
  bool relaxed(const ExprPtr& f, const Env& env, const std::string& prefix, const std::string* loopRule) {
    if (const auto* v = as<Var>(f)) {
      var(v->name, f->span, env);  // -Var
      return true;
    }
    if (const auto* l = as<Lit>(f)) {
      constant(l->value, f->span);
      return true;
    }
    if (is<App>(f)) {  // -App
      auto [head, args] = appSpine(f);
      if (!is<Var>(head) && !is<Lit>(head)) {
        report(loopRule ? *loopRule : prefix + "-App", f->span, "function argument must apply a named function");
        return false;
      }
      atom(head, env);
      for (const auto& a : args) {
        if (a->type && a->type->isArrow()) {
          report(prefix + "-App", a->span, "function-typed argument of type " + a->type->str());
        } else {
          atom(a, env);
        }
      }
      return true;
    }
    report(loopRule ? *loopRule : prefix + "-Var", f->span, "function argument must be a variable or an application");
    return false;
  }

  void expr(const ExprPtr& e, const Env& env) {
    if (is<Let>(e) || is<RecLets>(e)) {
      inner(e, env);
      return;
    }
    if (is<Var>(e) || is<Lit>(e)) {
      atom(e, env);
      return;
    }
    if (is<Never>(e)) return;
    if (const auto* a = as<App>(e)) {
      if (e->type->isArrow()) {
        if (cuda()) {
          report("WF-EC-App", e->span, "application must be full; result has function type " + e->type->str());
        } else {
          report("WF-EF-HOF", e->span, "partial application outside a parallel construct");
        }
      }
      appArgs(*a, e, env);
      return;
    }
    if (const auto* l = as<Lam>(e)) {
      report(cuda() ? "WF-EC-Let" : "WF-EF-HOF", e->span, "function value is not a top-level binding");
      expr(l->body, env.extend(l->param, e->type->param()));
      return;
    }
    if (const auto* m = as<Match>(e)) {
      atom(m->target, env);
      if (e->type->isArrow()) {
        report("WF-EX-Match", e->span, "match result has function type " + e->type->str());
      }
      Env branch = env;
      pattern(m->pat, branch);
      expr(m->thn, branch);
      expr(m->els, env);
      return;
    }
    if (const auto* r = as<RecordLit>(e)) {
      for (const auto& [_, v] : r->fields) atom(v, env);
      return;
    }
    if (const auto* s = as<SeqLit>(e)) {
      for (const auto& v : s->elems) atom(v, env);
      return;
    }
    if (is<Accelerate>(e)) {
      report("WF-Accelerate-Nested", e->span, "accelerate inside accelerated code");
      return;
    }
    if (is<Map>(e) || is<Map2>(e) || is<Reduce>(e) || is<Flatten>(e)) {
      if (cuda()) {
        report("WF-EC-Par", e->span, "Futhark parallel construct in CUDA-classified code");
      }
      parallel(e, env);
      return;
    }
    const auto& l = std::get<Loop>(e->node);
    if (!cuda()) report("WF-EF-Loop", e->span, "loop is only supported by the CUDA backend");
    loop(l, e, env);
  }

  void parallel(const ExprPtr& e, const Env& env) {
    std::string prefix = cuda() ? "WF-HC" : "WF-HF";
    if (const auto* m = as<Map>(e)) {
      relaxed(m->fn, env, prefix, nullptr);
      atom(m->seq, env);
    } else if (const auto* m = as<Map2>(e)) {
      relaxed(m->fn, env, prefix, nullptr);
      atom(m->lhs, env);
      atom(m->rhs, env);
    } else if (const auto* r = as<Reduce>(e)) {
      relaxed(r->fn, env, prefix, nullptr);
      atom(r->acc, env);
      atom(r->seq, env);
    } else if (const auto* f = as<Flatten>(e)) {
      atom(f->seq, env);
    }
  }

  void loop(const Loop& l, const ExprPtr& e, const Env& env) {
    static const std::string rule = "WF-EC-Loop";
    if (l.count->type->kind() != TypeKind::Int) {
      report(rule, l.count->span, "loop count must be Int, found " + l.count->type->str());
    }
    atom(l.count, env);
    Type want = Type::arrow(Type::integer(), Type::unit());
    if (*l.fn->type != want) {
      report(rule, l.fn->span, "loop iteration function must have type Int -> {}, found " + l.fn->type->str());
    }
    relaxed(l.fn, env, cuda() ? "WF-HC" : "WF-HF", &rule);
    (void)e;
  }

  // WF-PX-Rec: record-pattern variables take the projected field types.
  void pattern(const PatternPtr& p, Env& env) {
    if (const auto* v = std::get_if<PVar>(&p->node)) {
      checkType(*p->type, p->span, "pattern variable " + v->name.text);
      env = env.extend(v->name, *p->type);
    } else if (const auto* r = std::get_if<PRecord>(&p->node)) {
      for (const auto& [label, sub] : r->fields) {
        const Type* ft = p->type ? p->type->field(label) : nullptr;
        if (!ft || !sub->type || *ft != *sub->type) {
          report("WF-PX-Rec", sub->span, "pattern for field " + label + " does not match the record type");
        }
        pattern(sub, env);
      }
    }
  }
};

}  // namespace

Diagnostics checkFuthark(const ExprPtr& eFut) { return Checker(Backend::Futhark).run(eFut); }

Diagnostics checkCuda(const ExprPtr& eCu) { return Checker(Backend::Cuda).run(eCu); }

Diagnostics checkWellFormed(const BackendSplit& split) {
  Diagnostics out = checkFuthark(split.futProgram);
  Diagnostics cu = checkCuda(split.cuProgram);
  out.insert(out.end(), cu.begin(), cu.end());
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) { return a.span < b.span; });
  return out;
}

}  // namespace pmx
