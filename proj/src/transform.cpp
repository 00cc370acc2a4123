#include "pmx/transform.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>

#include "pmx/extraction.hpp"

namespace pmx {

std::pair<std::vector<const Lam*>, ExprPtr> lamChain(const ExprPtr& e) {
  std::vector<const Lam*> params;
  ExprPtr cur = e;
  while (const auto* l = as<Lam>(cur)) {
    params.push_back(l);
    cur = l->body;
  }
  return {params, cur};
}

namespace {

std::string where(Span s) { return std::to_string(s.line) + ":" + std::to_string(s.col); }

void collectBindings(const ExprPtr& e, std::map<Name, ExprPtr>& out) {
  if (const auto* l = as<Let>(e)) out[l->name] = l->bound;
  if (const auto* r = as<RecLets>(e)) {
    for (const auto& b : r->bindings) out[b.name] = b.body;
  }
  forEachChild(*e, [&](const ExprPtr& c) { collectBindings(c, out); });
}

class NestingChecker {
 public:
  explicit NestingChecker(const ExprPtr& root) { collectBindings(root, bodies_); }

  void scan(const ExprPtr& e) {
    if (const auto* a = as<Accelerate>(e)) {
      std::set<Name> visited;
      reach(a->body, e->span, nullptr, visited);
      return;
    }
    forEachChild(*e, [&](const ExprPtr& c) { scan(c); });
  }

  Diagnostics diags;

 private:
  std::map<Name, ExprPtr> bodies_;
  std::set<Span> reported_;

  void reach(const ExprPtr& e, Span outer, const Name* via, std::set<Name>& visited) {
    if (is<Accelerate>(e)) {
      if (reported_.insert(e->span).second) {
        std::string msg = "accelerate expression nested inside the accelerate expression at " + where(outer);
        if (via) msg += " (reachable through " + via->text + ")";
        diags.push_back({DiagKind::WellFormedError, "WF-Accelerate-Nested", e->span, msg});
      }
      return;
    }
    if (const auto* v = as<Var>(e)) {
      if (e->type && e->type->isArrow() && !visited.count(v->name)) {
        auto it = bodies_.find(v->name);
        if (it != bodies_.end()) {
          visited.insert(v->name);
          reach(it->second, outer, via ? via : &v->name, visited);
        }
      }
      return;
    }
    forEachChild(*e, [&](const ExprPtr& c) { reach(c, outer, via, visited); });
  }
};

ExprPtr rewriteAcc(const ExprPtr& e, AccelSet& acc) {
  ExprPtr c = mapChildren(e, [&](const ExprPtr& x) { return rewriteAcc(x, acc); });
  if (const auto* a = as<Accelerate>(c)) {
    Name n = freshName("a");
    acc.idents.insert(n);
    return mk(Let{n, std::nullopt, a->body, mk(Var{n}, e->span, a->body->type)}, e->span, a->body->type);
  }
  return c;
}

// ---- lambda lifting ----

struct Def {
  Name name;
  std::optional<Type> annot;
  ExprPtr bound;
  bool accel = false;
  Span span;
  ExprPtr own;  // bound with nested definitions removed
  std::set<Name> binders;
  std::set<Name> fv;
  std::vector<Name> captured;
  bool unitParam = false;
};

void collectBinders(const ExprPtr& e, std::set<Name>& out) {
  if (const auto* l = as<Lam>(e)) out.insert(l->param);
  if (const auto* l = as<Let>(e)) out.insert(l->name);
  if (const auto* r = as<RecLets>(e)) {
    for (const auto& b : r->bindings) out.insert(b.name);
  }
  if (const auto* m = as<Match>(e)) patternBinders(m->pat, out);
  forEachChild(*e, [&](const ExprPtr& c) { collectBinders(c, out); });
}

void collectTypes(const PatternPtr& p, std::map<Name, Type>& out) {
  if (const auto* v = std::get_if<PVar>(&p->node)) {
    if (p->type) out.emplace(v->name, *p->type);
  } else if (const auto* r = std::get_if<PRecord>(&p->node)) {
    for (const auto& [_, sub] : r->fields) collectTypes(sub, out);
  }
}

void collectTypes(const ExprPtr& e, std::map<Name, Type>& out) {
  if (const auto* l = as<Lam>(e)) {
    if (e->type) out.emplace(l->param, e->type->param());
  }
  if (const auto* l = as<Let>(e)) {
    if (l->bound->type) out.emplace(l->name, *l->bound->type);
  }
  if (const auto* r = as<RecLets>(e)) {
    for (const auto& b : r->bindings) {
      if (b.body->type) out.emplace(b.name, *b.body->type);
    }
  }
  if (const auto* m = as<Match>(e)) collectTypes(m->pat, out);
  forEachChild(*e, [&](const ExprPtr& c) { collectTypes(c, out); });
}

class Lifter {
 public:
  Lifter(const AccelSet& acc) : acc_(acc) {}

  Lifted run(const ExprPtr& input) {
    ExprPtr named = nameAnon(input);
    collectTypes(named, types_);
    collectDefs(named);
    ExprPtr mainOwn = strip(named);
    for (auto& d : defs_) {
      d.own = strip(d.bound);
      collectBinders(d.own, d.binders);
      d.fv = freeVars(d.own);
    }
    solveCaptures();

    std::map<Name, std::size_t> index;
    for (std::size_t i = 0; i < defs_.size(); ++i) index[defs_[i].name] = i;

    std::vector<ExprPtr> lifted(defs_.size());
    for (std::size_t i = 0; i < defs_.size(); ++i) lifted[i] = liftDef(defs_[i]);
    ExprPtr body = rewrite(mainOwn, {});

    Lifted out;
    for (const auto& d : defs_) {
      if (d.accel) out.accelArity[d.name] = d.unitParam ? 1 : static_cast<int>(d.captured.size());
    }

    auto groups = emissionOrder(index);
    for (auto g = groups.rbegin(); g != groups.rend(); ++g) {
      const Def& first = defs_[g->front()];
      bool selfRef = first.fv.count(first.name) != 0;
      if (g->size() == 1 && !selfRef) {
        body = mk(Let{first.name, liftedAnnot(first), lifted[g->front()], body}, first.span, body->type);
      } else {
        RecLets r;
        for (std::size_t i : *g) {
          r.bindings.push_back(Binding{defs_[i].name, liftedAnnot(defs_[i]), lifted[i], defs_[i].span});
        }
        r.body = body;
        body = mk(std::move(r), first.span, body->type);
      }
    }
    out.program = body;
    return out;
  }

 private:
  const AccelSet& acc_;
  std::vector<Def> defs_;
  std::set<Name> defNames_;
  std::map<Name, Type> types_;

  bool isDefLet(const Let& l) const { return acc_.contains(l.name) || is<Lam>(l.bound); }

  ExprPtr nameChain(const ExprPtr& lam) {
    if (const auto* l = as<Lam>(lam)) {
      Lam c = *l;
      c.body = nameChain(l->body);
      return withNode(lam, c);
    }
    return nameAnon(lam);
  }

  ExprPtr nameAnon(const ExprPtr& e) {
    if (const auto* l = as<Let>(e)) {
      Let c = *l;
      c.bound = (!acc_.contains(l->name) && is<Lam>(l->bound)) ? nameChain(l->bound) : nameAnon(l->bound);
      c.body = nameAnon(l->body);
      return withNode(e, c);
    }
    if (const auto* r = as<RecLets>(e)) {
      RecLets c = *r;
      for (auto& b : c.bindings) b.body = nameChain(b.body);
      c.body = nameAnon(r->body);
      return withNode(e, c);
    }
    if (is<Lam>(e)) {
      Name n = freshName("fn");
      return mk(Let{n, std::nullopt, nameChain(e), mk(Var{n}, e->span, e->type)}, e->span, e->type);
    }
    return mapChildren(e, [&](const ExprPtr& c) { return nameAnon(c); });
  }

  void collectDefs(const ExprPtr& e) {
    if (const auto* l = as<Let>(e)) {
      if (isDefLet(*l)) {
        Def d;
        d.name = l->name;
        d.annot = l->annot;
        d.bound = l->bound;
        d.accel = acc_.contains(l->name);
        d.span = e->span;
        defs_.push_back(std::move(d));
        defNames_.insert(l->name);
      }
    }
    if (const auto* r = as<RecLets>(e)) {
      for (const auto& b : r->bindings) {
        Def d;
        d.name = b.name;
        d.annot = b.annot;
        d.bound = b.body;
        d.span = b.span;
        defs_.push_back(std::move(d));
        defNames_.insert(b.name);
      }
    }
    forEachChild(*e, [&](const ExprPtr& c) { collectDefs(c); });
  }

  ExprPtr strip(const ExprPtr& e) {
    if (const auto* l = as<Let>(e)) {
      if (isDefLet(*l)) return strip(l->body);
    }
    if (const auto* r = as<RecLets>(e)) return strip(r->body);
    return mapChildren(e, [&](const ExprPtr& c) { return strip(c); });
  }

  void solveCaptures() {
    std::map<Name, std::set<Name>> cap;
    for (const auto& d : defs_) {
      auto& c = cap[d.name];
      for (const auto& v : d.fv) {
        if (!defNames_.count(v)) c.insert(v);
      }
    }
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& d : defs_) {
        auto& c = cap[d.name];
        for (const auto& g : d.fv) {
          if (!defNames_.count(g)) continue;
          for (const auto& v : std::set<Name>(cap[g])) {
            if (!d.binders.count(v) && c.insert(v).second) changed = true;
          }
        }
      }
    }
    for (auto& d : defs_) {
      const auto& c = cap[d.name];
      d.captured.assign(c.begin(), c.end());
      d.unitParam = d.accel && d.captured.empty();
    }
  }

  const Def& def(const Name& n) const {
    return *std::find_if(defs_.begin(), defs_.end(), [&](const Def& d) { return d.name == n; });
  }

  Type typeOf(const Name& n) const {
    auto it = types_.find(n);
    return it == types_.end() ? Type::unit() : it->second;
  }

  Type liftedType(const Def& d) const {
    Type t = d.bound->type ? *d.bound->type : Type::unit();
    if (d.unitParam) return Type::arrow(Type::unit(), t);
    for (auto it = d.captured.rbegin(); it != d.captured.rend(); ++it) t = Type::arrow(typeOf(*it), t);
    return t;
  }

  std::optional<Type> liftedAnnot(const Def& d) const {
    if (!d.annot) return std::nullopt;
    return liftedType(d);
  }

  ExprPtr rewrite(const ExprPtr& e, const std::map<Name, Name>& rename) {
    if (const auto* v = as<Var>(e)) {
      if (defNames_.count(v->name)) {
        const Def& g = def(v->name);
        ExprPtr head = mk(Var{v->name}, e->span, liftedType(g));
        std::vector<ExprPtr> args;
        if (g.unitParam) args.push_back(mkUnit(e->span));
        for (const auto& c : g.captured) {
          auto it = rename.find(c);
          args.push_back(mk(Var{it == rename.end() ? c : it->second}, e->span, typeOf(c)));
        }
        return mkApps(head, args, e->span);
      }
      auto it = rename.find(v->name);
      if (it != rename.end()) return withNode(e, Var{it->second});
      return e;
    }
    return mapChildren(e, [&](const ExprPtr& c) { return rewrite(c, rename); });
  }

  ExprPtr liftDef(const Def& d) {
    std::map<Name, Name> rename;
    std::vector<Name> params;
    for (const auto& c : d.captured) {
      Name p = freshName(c.text);
      rename[c] = p;
      params.push_back(p);
    }
    ExprPtr body = rewrite(d.own, rename);
    Span sp = d.own->span;
    if (d.unitParam) {
      Type t = Type::arrow(Type::unit(), *body->type);
      return mk(Lam{freshName("_"), Type::unit(), body}, sp, t);
    }
    for (std::size_t i = params.size(); i-- > 0;) {
      Type t = Type::arrow(typeOf(d.captured[i]), *body->type);
      body = mk(Lam{params[i], std::nullopt, body}, sp, t);
    }
    return body;
  }

  // SCCs of the reference graph, callee first, ties broken by source position.
  std::vector<std::vector<std::size_t>> emissionOrder(const std::map<Name, std::size_t>& index) {
    std::size_t n = defs_.size();
    std::vector<std::vector<std::size_t>> edges(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& g : defs_[i].fv) {
        auto it = index.find(g);
        if (it != index.end()) edges[i].push_back(it->second);
      }
    }
    // Tarjan.
    std::vector<int> idx(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> onStack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0, ncomp = 0;
    std::function<void(std::size_t)> visit = [&](std::size_t v) {
      idx[v] = low[v] = counter++;
      stack.push_back(v);
      onStack[v] = true;
      for (std::size_t w : edges[v]) {
        if (idx[w] < 0) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (onStack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
      }
      if (low[v] == idx[v]) {
        for (;;) {
          std::size_t w = stack.back();
          stack.pop_back();
          onStack[w] = false;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (idx[i] < 0) visit(i);
    }
    std::vector<std::vector<std::size_t>> members(ncomp);
    for (std::size_t i = 0; i < n; ++i) members[comp[i]].push_back(i);
    auto spanOf = [&](std::size_t i) { return defs_[i].span; };
    for (auto& m : members) {
      std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return spanOf(a) < spanOf(b); });
    }
    // Kahn over the condensation: a component is ready once all its callees are emitted.
    std::vector<std::set<int>> deps(ncomp);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t w : edges[i]) {
        if (comp[w] != comp[i]) deps[comp[i]].insert(comp[w]);
      }
    }
    std::vector<std::vector<int>> dependents(ncomp);
    std::vector<std::size_t> waiting(ncomp);
    for (int c = 0; c < ncomp; ++c) {
      waiting[c] = deps[c].size();
      for (int d : deps[c]) dependents[d].push_back(c);
    }
    auto later = [&](int a, int b) {
      return std::make_pair(spanOf(members[a].front()), members[a].front()) >
             std::make_pair(spanOf(members[b].front()), members[b].front());
    };
    std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
    for (int c = 0; c < ncomp; ++c) {
      if (waiting[c] == 0) ready.push(c);
    }
    std::vector<std::vector<std::size_t>> order;
    while (!ready.empty()) {
      int c = ready.top();
      ready.pop();
      order.push_back(members[c]);
      for (int d : dependents[c]) {
        if (--waiting[d] == 0) ready.push(d);
      }
    }
    return order;
  }
};

}  // namespace

Diagnostics checkNoNestedAccelerate(const ExprPtr& e) {
  NestingChecker c(e);
  c.scan(e);
  return c.diags;
}

Rewritten rewriteAccelerate(const ExprPtr& e) {
  Rewritten r;
  r.program = rewriteAcc(e, r.accel);
  return r;
}

Lifted lambdaLift(const ExprPtr& e, const AccelSet& accel) {
  Lifter l(accel);
  return l.run(e);
}

}  // namespace pmx
