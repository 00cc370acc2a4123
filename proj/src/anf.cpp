#include <variant>

#include "pmx/transform.hpp"

namespace pmx {
namespace {

bool isAtom(const ExprPtr& e) {
  if (is<Var>(e) || is<Lit>(e) || is<Never>(e)) return true;
  const auto* r = as<RecordLit>(e);
  return r && r->fields.empty();
}

// Builtins whose arrow-typed arguments stay in place.
bool isHigherOrderBuiltin(const ExprPtr& head) {
  const auto* l = as<Lit>(head);
  if (!l || !l->value.isBuiltin()) return false;
  Builtin b = std::get<Builtin>(l->value.value);
  return b == Builtin::Create || b == Builtin::Foldl || b == Builtin::TensorCreate;
}

class Normalizer {
 public:
  ExprPtr term(const ExprPtr& e) {
    std::vector<Entry> saved;
    saved.swap(pending_);
    ExprPtr r = comp(e);
    ExprPtr out = wrap(r);
    pending_.swap(saved);
    return out;
  }

 private:
  struct Bind {
    Name name;
    std::optional<Type> annot;
    ExprPtr bound;
    Span span;
  };
  struct Group {
    std::vector<Binding> bindings;
    Span span;
  };
  using Entry = std::variant<Bind, Group>;

  std::vector<Entry> pending_;
  int counter_ = 0;

  ExprPtr wrap(ExprPtr body) {
    for (auto it = pending_.rbegin(); it != pending_.rend(); ++it) {
      if (const auto* b = std::get_if<Bind>(&*it)) {
        body = mk(Let{b->name, b->annot, b->bound, body}, b->span, body->type);
      } else {
        const auto& g = std::get<Group>(*it);
        body = mk(RecLets{g.bindings, body}, g.span, body->type);
      }
    }
    pending_.clear();
    return body;
  }

  ExprPtr atom(const ExprPtr& e) {
    ExprPtr r = comp(e);
    if (isAtom(r)) return r;
    Name t = freshName("t#" + std::to_string(++counter_));
    pending_.push_back(Bind{t, std::nullopt, r, e->span});
    return mk(Var{t}, e->span, r->type);
  }

  // A variable, a constant, or an application whose head and arguments are atoms.
  ExprPtr inPlace(const ExprPtr& e) {
    if (is<Var>(e) || is<Lit>(e)) return e;
    if (is<App>(e)) return app(e);
    return atom(e);
  }

  ExprPtr app(const ExprPtr& e) {
    auto [head, args] = appSpine(e);
    bool hof = isHigherOrderBuiltin(head);
    ExprPtr h = atom(head);
    std::vector<ExprPtr> as;
    for (const auto& a : args) {
      as.push_back(hof && a->type && a->type->isArrow() ? inPlace(a) : atom(a));
    }
    // Rebuild with the original intermediate node types.
    std::vector<ExprPtr> spine;
    ExprPtr cur = e;
    while (const auto* ap = pmx::as<App>(cur)) {
      spine.push_back(cur);
      cur = ap->fn;
    }
    ExprPtr out = h;
    for (std::size_t i = 0; i < as.size(); ++i) {
      const ExprPtr& orig = spine[spine.size() - 1 - i];
      out = mk(App{out, as[i]}, orig->span, orig->type);
    }
    return out;
  }

  ExprPtr comp(const ExprPtr& e) {
    if (isAtom(e)) return e;
    if (const auto* l = as<Lam>(e)) {
      Lam c = *l;
      c.body = term(l->body);
      return withNode(e, c);
    }
    if (is<App>(e)) return app(e);
    if (const auto* l = as<Let>(e)) {
      ExprPtr b = comp(l->bound);
      pending_.push_back(Bind{l->name, l->annot, b, e->span});
      return comp(l->body);
    }
    if (const auto* r = as<RecLets>(e)) {
      Group g{r->bindings, e->span};
      for (auto& b : g.bindings) b.body = term(b.body);
      pending_.push_back(std::move(g));
      return comp(r->body);
    }
    if (const auto* m = as<Match>(e)) {
      Match c = *m;
      c.target = atom(m->target);
      c.thn = term(m->thn);
      c.els = term(m->els);
      return withNode(e, c);
    }
    if (const auto* r = as<RecordLit>(e)) {
      RecordLit c = *r;
      for (auto& [_, v] : c.fields) v = atom(v);
      return withNode(e, c);
    }
    if (const auto* s = as<SeqLit>(e)) {
      SeqLit c = *s;
      for (auto& v : c.elems) v = atom(v);
      return withNode(e, c);
    }
    if (const auto* a = as<Accelerate>(e)) return withNode(e, Accelerate{term(a->body)});
    if (const auto* m = as<Map>(e)) {
      ExprPtr f = inPlace(m->fn);
      return withNode(e, Map{f, atom(m->seq)});
    }
    if (const auto* m = as<Map2>(e)) {
      ExprPtr f = inPlace(m->fn);
      ExprPtr a = atom(m->lhs);
      return withNode(e, Map2{f, a, atom(m->rhs)});
    }
    if (const auto* r = as<Reduce>(e)) {
      ExprPtr f = inPlace(r->fn);
      ExprPtr a = atom(r->acc);
      return withNode(e, Reduce{f, a, atom(r->seq)});
    }
    if (const auto* f = as<Flatten>(e)) return withNode(e, Flatten{atom(f->seq)});
    const auto& l = std::get<Loop>(e->node);
    ExprPtr n = atom(l.count);
    return withNode(e, Loop{n, inPlace(l.fn)});
  }
};

}  // namespace

ExprPtr toANF(const ExprPtr& e) {
  Normalizer n;
  return n.term(e);
}

}  // namespace pmx
