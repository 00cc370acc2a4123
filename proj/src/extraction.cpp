#include "pmx/extraction.hpp"

#include <map>

namespace pmx {
namespace {

class FreeVarCollector {
 public:
  std::set<Name> out;

  void expr(const ExprPtr& e) {
    if (const auto* v = as<Var>(e)) {
      if (!bound_.count(v->name)) out.insert(v->name);
      return;
    }
    if (const auto* l = as<Lam>(e)) {
      bind(l->param);
      expr(l->body);
      unbind(l->param);
      return;
    }
    if (const auto* l = as<Let>(e)) {
      expr(l->bound);
      bind(l->name);
      expr(l->body);
      unbind(l->name);
      return;
    }
    if (const auto* r = as<RecLets>(e)) {
      for (const auto& b : r->bindings) bind(b.name);
      for (const auto& b : r->bindings) expr(b.body);
      expr(r->body);
      for (const auto& b : r->bindings) unbind(b.name);
      return;
    }
    if (const auto* m = as<Match>(e)) {
      expr(m->target);
      expr(m->els);
      std::set<Name> ps;
      patternBinders(m->pat, ps);
      for (const auto& n : ps) bind(n);
      expr(m->thn);
      for (const auto& n : ps) unbind(n);
      return;
    }
    forEachChild(*e, [&](const ExprPtr& c) { expr(c); });
  }

 private:
  std::map<Name, int> bound_;

  void bind(const Name& n) { ++bound_[n]; }
  void unbind(const Name& n) {
    auto it = bound_.find(n);
    if (--it->second == 0) bound_.erase(it);
  }
};

struct Link {
  const Let* let = nullptr;
  const RecLets* rec = nullptr;
  ExprPtr node;
};

}  // namespace

void patternBinders(const PatternPtr& p, std::set<Name>& out) {
  if (const auto* v = std::get_if<PVar>(&p->node)) {
    out.insert(v->name);
  } else if (const auto* r = std::get_if<PRecord>(&p->node)) {
    for (const auto& [_, sub] : r->fields) patternBinders(sub, out);
  }
}

std::set<Name> freeVars(const ExprPtr& e) {
  FreeVarCollector c;
  c.expr(e);
  return std::move(c.out);
}

std::vector<Name> topLevelNames(const ExprPtr& e) {
  std::vector<Name> out;
  ExprPtr cur = e;
  for (;;) {
    if (const auto* l = as<Let>(cur)) {
      out.push_back(l->name);
      cur = l->body;
    } else if (const auto* r = as<RecLets>(cur)) {
      for (const auto& b : r->bindings) out.push_back(b.name);
      cur = r->body;
    } else {
      return out;
    }
  }
}

Extracted extract(const std::set<Name>& I, const ExprPtr& e) {
  std::vector<Link> chain;
  ExprPtr cur = e;
  for (;;) {
    if (const auto* l = as<Let>(cur)) {
      chain.push_back({l, nullptr, cur});
      cur = l->body;
    } else if (const auto* r = as<RecLets>(cur)) {
      chain.push_back({nullptr, r, cur});
      cur = r->body;
    } else {
      break;
    }
  }

  // Base case: (I, {}).
  std::set<Name> need = I;
  std::set<Name> kept;
  ExprPtr out = mkUnit(cur->span);

  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (it->let) {
      const Let& l = *it->let;
      if (!need.count(l.name)) continue;
      for (const auto& n : freeVars(l.bound)) need.insert(n);
      kept.insert(l.name);
      out = mk(Let{l.name, l.annot, l.bound, out}, it->node->span, Type::unit());
      continue;
    }
    const RecLets& r = *it->rec;
    std::map<Name, std::set<Name>> fvs;
    std::set<Name> selected;
    for (const auto& b : r.bindings) {
      fvs[b.name] = freeVars(b.body);
      if (need.count(b.name)) selected.insert(b.name);
    }
    // Close the selection over the group's internal references.
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& b : r.bindings) {
        if (selected.count(b.name)) continue;
        for (const auto& x : selected) {
          if (fvs[x].count(b.name)) {
            selected.insert(b.name);
            grew = true;
            break;
          }
        }
      }
    }
    if (selected.empty()) continue;
    RecLets kept_group;
    for (const auto& b : r.bindings) {
      if (!selected.count(b.name)) continue;
      kept_group.bindings.push_back(b);
      kept.insert(b.name);
      for (const auto& n : fvs[b.name]) need.insert(n);
    }
    kept_group.body = out;
    out = mk(std::move(kept_group), it->node->span, Type::unit());
  }
  return {kept, out};
}

}  // namespace pmx
