#include <unordered_map>

#include "pmx/lang.hpp"

namespace pmx {
namespace {

enum class K { Meta, Int, Float, Bool, Char, Arrow, Record, Seq, Tensor };

struct TNode {
  K kind;
  std::vector<int> args;  // Arrow {p, r}; Seq/Tensor {elem}; Record field types
  std::vector<std::string> labels;
  int link = -1;  // Meta: bound target
  Span origin;    // Meta: where it was introduced
};

struct TypeFailure {
  Span span;
  std::string message;
};

struct HasField {
  int record;
  std::string label;
  int field;
  Span span;
};

class Checker {
 public:
  ExprPtr run(const ExprPtr& root) {
    int t = infer(root);
    (void)t;
    solveFields(true);
    return rebuild(root);
  }

 private:
  std::vector<TNode> nodes_;
  std::unordered_map<Name, int, NameHash> env_;
  std::unordered_map<const Expr*, int> exprType_;
  std::unordered_map<const Pattern*, int> patType_;
  std::vector<HasField> pending_;

  [[noreturn]] static void fail(Span sp, std::string msg) { throw TypeFailure{sp, std::move(msg)}; }

  int node(K k, std::vector<int> args = {}, std::vector<std::string> labels = {}) {
    nodes_.push_back(TNode{k, std::move(args), std::move(labels), -1, {}});
    return static_cast<int>(nodes_.size()) - 1;
  }
  int meta(Span origin) {
    int id = node(K::Meta);
    nodes_[id].origin = origin;
    return id;
  }
  int tInt() { return node(K::Int); }
  int tFloat() { return node(K::Float); }
  int tBool() { return node(K::Bool); }
  int tChar() { return node(K::Char); }
  int tSeq(int e) { return node(K::Seq, {e}); }
  int tTensor(int e) { return node(K::Tensor, {e}); }
  int tArrow(int p, int r) { return node(K::Arrow, {p, r}); }
  int tArrows(std::initializer_list<int> ts) {
    std::vector<int> v(ts);
    int t = v.back();
    for (int i = static_cast<int>(v.size()) - 2; i >= 0; --i) t = tArrow(v[i], t);
    return t;
  }
  int tUnit() { return node(K::Record); }

  int fromType(const Type& t) {
    switch (t.kind()) {
      case TypeKind::Int:
        return tInt();
      case TypeKind::Float:
        return tFloat();
      case TypeKind::Bool:
        return tBool();
      case TypeKind::Char:
        return tChar();
      case TypeKind::Arrow:
        return tArrow(fromType(t.param()), fromType(t.result()));
      case TypeKind::Seq:
        return tSeq(fromType(t.elem()));
      case TypeKind::Tensor:
        return tTensor(fromType(t.elem()));
      case TypeKind::Record: {
        std::vector<int> args;
        std::vector<std::string> labels;
        for (const auto& [l, ft] : t.fields()) {
          labels.push_back(l);
          args.push_back(fromType(ft));
        }
        return node(K::Record, std::move(args), std::move(labels));
      }
    }
    return tUnit();
  }

  int find(int t) {
    while (nodes_[t].kind == K::Meta && nodes_[t].link >= 0) {
      int next = nodes_[t].link;
      if (nodes_[next].kind == K::Meta && nodes_[next].link >= 0) nodes_[t].link = nodes_[next].link;
      t = next;
    }
    return t;
  }

  bool occurs(int m, int t) {
    t = find(t);
    if (t == m) return true;
    for (int a : nodes_[t].args) {
      if (occurs(m, a)) return true;
    }
    return false;
  }

  std::string show(int t) {
    t = find(t);
    const TNode& n = nodes_[t];
    switch (n.kind) {
      case K::Meta:
        return "?" + std::to_string(t);
      case K::Int:
        return "Int";
      case K::Float:
        return "Float";
      case K::Bool:
        return "Bool";
      case K::Char:
        return "Char";
      case K::Arrow: {
        std::string p = show(n.args[0]);
        if (nodes_[find(n.args[0])].kind == K::Arrow) p = "(" + p + ")";
        return p + " -> " + show(n.args[1]);
      }
      case K::Seq:
        return "[" + show(n.args[0]) + "]";
      case K::Tensor:
        return "Tensor[" + show(n.args[0]) + "]";
      case K::Record: {
        std::string out = "{";
        for (std::size_t i = 0; i < n.labels.size(); ++i) {
          if (i) out += ", ";
          out += n.labels[i] + " : " + show(n.args[i]);
        }
        return out + "}";
      }
    }
    return "?";
  }

  // expected vs actual, for messages.
  void unify(int expected, int actual, Span sp) {
    if (!unifyRec(expected, actual)) {
      fail(sp, "expected type " + show(expected) + ", found " + show(actual));
    }
  }

  bool unifyRec(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return true;
    if (nodes_[a].kind == K::Meta) {
      if (occurs(a, b)) return false;
      nodes_[a].link = b;
      return true;
    }
    if (nodes_[b].kind == K::Meta) return unifyRec(b, a);
    const TNode& x = nodes_[a];
    const TNode& y = nodes_[b];
    if (x.kind != y.kind) return false;
    if (x.kind == K::Record) {
      if (x.labels.size() != y.labels.size()) return false;
      std::vector<int> xa = x.args, ya = y.args;
      std::vector<std::string> xl = x.labels, yl = y.labels;
      for (std::size_t i = 0; i < xl.size(); ++i) {
        std::size_t j = 0;
        while (j < yl.size() && yl[j] != xl[i]) ++j;
        if (j == yl.size() || !unifyRec(xa[i], ya[j])) return false;
      }
      return true;
    }
    std::vector<int> xa = x.args, ya = y.args;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      if (!unifyRec(xa[i], ya[i])) return false;
    }
    return true;
  }

  // Resolves has-field constraints whose record type is known. With final set,
  // any left over is an ambiguity error.
  void solveFields(bool final) {
    bool progress = true;
    while (progress && !pending_.empty()) {
      progress = false;
      std::vector<HasField> rest;
      for (const auto& c : pending_) {
        int r = find(c.record);
        const TNode& n = nodes_[r];
        if (n.kind == K::Meta) {
          rest.push_back(c);
          continue;
        }
        if (n.kind != K::Record) fail(c.span, "expected a record type, found " + show(r));
        std::size_t i = 0;
        while (i < n.labels.size() && n.labels[i] != c.label) ++i;
        if (i == n.labels.size()) fail(c.span, "record type " + show(r) + " has no field " + c.label);
        unify(n.args[i], c.field, c.span);
        progress = true;
      }
      pending_ = std::move(rest);
    }
    if (final && !pending_.empty()) {
      fail(pending_.front().span, "ambiguous type: cannot infer the record type for field " + pending_.front().label);
    }
  }

  int builtinType(Builtin b, Span sp) {
    switch (b) {
      case Builtin::Addi:
      case Builtin::Subi:
      case Builtin::Muli:
      case Builtin::Divi:
      case Builtin::Modi:
        return tArrows({tInt(), tInt(), tInt()});
      case Builtin::Negi:
        return tArrows({tInt(), tInt()});
      case Builtin::Addf:
      case Builtin::Subf:
      case Builtin::Mulf:
      case Builtin::Divf:
        return tArrows({tFloat(), tFloat(), tFloat()});
      case Builtin::Negf:
      case Builtin::Exp:
      case Builtin::Log:
      case Builtin::Sin:
      case Builtin::Cos:
      case Builtin::Sqrt:
        return tArrows({tFloat(), tFloat()});
      case Builtin::Eqi:
      case Builtin::Neqi:
      case Builtin::Lti:
      case Builtin::Gti:
      case Builtin::Leqi:
      case Builtin::Geqi:
        return tArrows({tInt(), tInt(), tBool()});
      case Builtin::Eqf:
      case Builtin::Ltf:
      case Builtin::Gtf:
      case Builtin::Leqf:
      case Builtin::Geqf:
        return tArrows({tFloat(), tFloat(), tBool()});
      case Builtin::Int2Float:
        return tArrows({tInt(), tFloat()});
      case Builtin::Floor:
        return tArrows({tFloat(), tInt()});
      case Builtin::Int2String:
        return tArrows({tInt(), tSeq(tChar())});
      case Builtin::Float2String:
        return tArrows({tFloat(), tSeq(tChar())});
      case Builtin::Create: {
        int a = meta(sp);
        return tArrows({tInt(), tArrow(tInt(), a), tSeq(a)});
      }
      case Builtin::Length:
        return tArrows({tSeq(meta(sp)), tInt()});
      case Builtin::Get: {
        int a = meta(sp);
        return tArrows({tSeq(a), tInt(), a});
      }
      case Builtin::Set: {
        int a = meta(sp);
        return tArrows({tSeq(a), tInt(), a, tSeq(a)});
      }
      case Builtin::Concat: {
        int a = meta(sp);
        return tArrows({tSeq(a), tSeq(a), tSeq(a)});
      }
      case Builtin::Foldl: {
        int a = meta(sp), acc = meta(sp);
        return tArrows({tArrows({acc, a, acc}), acc, tSeq(a), acc});
      }
      case Builtin::Reverse: {
        int a = meta(sp);
        return tArrows({tSeq(a), tSeq(a)});
      }
      case Builtin::TensorCreate: {
        int a = meta(sp);
        return tArrows({tSeq(tInt()), tArrow(tSeq(tInt()), a), tTensor(a)});
      }
      case Builtin::TensorGet: {
        int a = meta(sp);
        return tArrows({tTensor(a), tSeq(tInt()), a});
      }
      case Builtin::TensorSet: {
        int a = meta(sp);
        return tArrows({tTensor(a), tSeq(tInt()), a, tUnit()});
      }
      case Builtin::TensorSub: {
        int a = meta(sp);
        return tArrows({tTensor(a), tInt(), tInt(), tTensor(a)});
      }
      case Builtin::TensorShape:
        return tArrows({tTensor(meta(sp)), tSeq(tInt())});
      case Builtin::Print:
        return tArrows({tSeq(tChar()), tUnit()});
      case Builtin::ReadFile:
        return tArrows({tSeq(tChar()), tSeq(tChar())});
      case Builtin::WriteFile:
        return tArrows({tSeq(tChar()), tSeq(tChar()), tUnit()});
    }
    return meta(sp);
  }

  int constType(const Const& c, Span sp) {
    return std::visit(
        [&](const auto& v) -> int {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::int64_t>) {
            return tInt();
          } else if constexpr (std::is_same_v<T, double>) {
            return tFloat();
          } else if constexpr (std::is_same_v<T, bool>) {
            return tBool();
          } else if constexpr (std::is_same_v<T, char32_t>) {
            return tChar();
          } else {
            return builtinType(v, sp);
          }
        },
        c.value);
  }

  int lookup(const Name& n, Span sp) {
    auto it = env_.find(n);
    if (it == env_.end()) fail(sp, "unbound variable " + n.text);
    return it->second;
  }

  int pattern(const PatternPtr& p, int target) {
    patType_[p.get()] = target;
    if (p->type) unify(fromType(*p->type), target, p->span);
    if (const auto* v = std::get_if<PVar>(&p->node)) {
      env_[v->name] = target;
    } else if (const auto* c = std::get_if<PConst>(&p->node)) {
      if (c->value.isBuiltin()) fail(p->span, "builtin constants cannot be matched");
      unify(constType(c->value, p->span), target, p->span);
    } else {
      const auto& r = std::get<PRecord>(p->node);
      if (r.fields.empty()) unify(tUnit(), target, p->span);
      for (const auto& [l, sub] : r.fields) {
        int ft = meta(sub->span);
        pending_.push_back({target, l, ft, sub->span});
        pattern(sub, ft);
      }
      solveFields(false);
    }
    return target;
  }

  int infer(const ExprPtr& e) {
    int t = inferNode(e);
    if (e->type) unify(fromType(*e->type), t, e->span);
    exprType_[e.get()] = t;
    return t;
  }

  int inferNode(const ExprPtr& e) {
    const Span sp = e->span;
    if (const auto* v = as<Var>(e)) return lookup(v->name, sp);
    if (const auto* l = as<Lit>(e)) return constType(l->value, sp);
    if (const auto* l = as<Lam>(e)) {
      int p = l->paramType ? fromType(*l->paramType) : meta(sp);
      env_[l->param] = p;
      return tArrow(p, infer(l->body));
    }
    if (const auto* a = as<App>(e)) {
      int f = infer(a->fn);
      int x = infer(a->arg);
      int r = meta(sp);
      int fr = find(f);
      if (nodes_[fr].kind == K::Arrow) {
        unify(nodes_[fr].args[0], x, a->arg->span);
        unify(nodes_[fr].args[1], r, sp);
      } else if (nodes_[fr].kind == K::Meta) {
        unify(f, tArrow(x, r), sp);
      } else {
        fail(a->fn->span, "cannot apply a value of type " + show(f));
      }
      return r;
    }
    if (const auto* l = as<Let>(e)) {
      int b = infer(l->bound);
      if (l->annot) unify(fromType(*l->annot), b, l->bound->span);
      env_[l->name] = b;
      return infer(l->body);
    }
    if (const auto* r = as<RecLets>(e)) {
      std::vector<int> ts;
      for (const auto& b : r->bindings) {
        int t = b.annot ? fromType(*b.annot) : meta(b.span);
        env_[b.name] = t;
        ts.push_back(t);
      }
      for (std::size_t i = 0; i < r->bindings.size(); ++i) {
        unify(ts[i], infer(r->bindings[i].body), r->bindings[i].body->span);
      }
      return infer(r->body);
    }
    if (const auto* m = as<Match>(e)) {
      int t = infer(m->target);
      pattern(m->pat, t);
      int a = infer(m->thn);
      int b = infer(m->els);
      unify(a, b, m->els->span);
      return a;
    }
    if (is<Never>(e)) return meta(sp);
    if (const auto* r = as<RecordLit>(e)) {
      std::vector<int> args;
      std::vector<std::string> labels;
      for (const auto& [l, v] : r->fields) {
        labels.push_back(l);
        args.push_back(infer(v));
      }
      return node(K::Record, std::move(args), std::move(labels));
    }
    if (const auto* s = as<SeqLit>(e)) {
      int el = meta(sp);
      for (const auto& x : s->elems) unify(el, infer(x), x->span);
      return tSeq(el);
    }
    if (const auto* a = as<Accelerate>(e)) return infer(a->body);
    if (const auto* m = as<Map>(e)) {
      int a = meta(sp), b = meta(sp);
      unify(tArrow(a, b), infer(m->fn), m->fn->span);
      unify(tSeq(a), infer(m->seq), m->seq->span);
      return tSeq(b);
    }
    if (const auto* m = as<Map2>(e)) {
      int a = meta(sp), b = meta(sp), c = meta(sp);
      unify(tArrows({a, b, c}), infer(m->fn), m->fn->span);
      unify(tSeq(a), infer(m->lhs), m->lhs->span);
      unify(tSeq(b), infer(m->rhs), m->rhs->span);
      return tSeq(c);
    }
    if (const auto* r = as<Reduce>(e)) {
      int a = meta(sp);
      unify(tArrows({a, a, a}), infer(r->fn), r->fn->span);
      unify(a, infer(r->acc), r->acc->span);
      unify(tSeq(a), infer(r->seq), r->seq->span);
      return a;
    }
    if (const auto* f = as<Flatten>(e)) {
      int a = meta(sp);
      unify(tSeq(tSeq(a)), infer(f->seq), f->seq->span);
      return tSeq(a);
    }
    const auto& l = std::get<Loop>(e->node);
    unify(tInt(), infer(l.count), l.count->span);
    unify(tArrow(tInt(), meta(sp)), infer(l.fn), l.fn->span);
    return tUnit();
  }

  Type zonk(int t, Span sp) {
    t = find(t);
    const TNode& n = nodes_[t];
    switch (n.kind) {
      case K::Meta:
        fail(sp, "ambiguous type: could not infer a type here");
      case K::Int:
        return Type::integer();
      case K::Float:
        return Type::floating();
      case K::Bool:
        return Type::boolean();
      case K::Char:
        return Type::character();
      case K::Arrow:
        return Type::arrow(zonk(n.args[0], sp), zonk(n.args[1], sp));
      case K::Seq:
        return Type::seq(zonk(n.args[0], sp));
      case K::Tensor: {
        Type el = zonk(n.args[0], sp);
        if (el.kind() != TypeKind::Int && el.kind() != TypeKind::Float) {
          fail(sp, "tensor elements must be Int or Float, found " + el.str());
        }
        return Type::tensor(el);
      }
      case K::Record: {
        std::vector<Type::Field> fields;
        std::vector<int> args = n.args;
        std::vector<std::string> labels = n.labels;
        for (std::size_t i = 0; i < labels.size(); ++i) fields.emplace_back(labels[i], zonk(args[i], sp));
        return Type::record(std::move(fields));
      }
    }
    fail(sp, "internal: bad type node");
  }

  PatternPtr rebuildPattern(const PatternPtr& p) {
    Type t = zonk(patType_.at(p.get()), p->span);
    if (const auto* r = std::get_if<PRecord>(&p->node)) {
      PRecord c = *r;
      for (auto& [_, sub] : c.fields) sub = rebuildPattern(sub);
      return mkPat(std::move(c), p->span, t);
    }
    return mkPat(p->node, p->span, t);
  }

  ExprPtr rebuild(const ExprPtr& e) {
    Type t = zonk(exprType_.at(e.get()), e->span);
    ExprPtr c = mapChildren(e, [&](const ExprPtr& x) { return rebuild(x); });
    if (const auto* m = as<Match>(c)) {
      Match mm = *m;
      mm.pat = rebuildPattern(m->pat);
      return mk(std::move(mm), e->span, t);
    }
    return mk(c->node, e->span, t);
  }
};

}  // namespace

Outcome<ExprPtr> typecheck(const ExprPtr& e) {
  try {
    Checker c;
    return c.run(e);
  } catch (const TypeFailure& f) {
    return Diagnostics{Diagnostic{DiagKind::TypeError, std::nullopt, f.span, f.message}};
  }
}

}  // namespace pmx
