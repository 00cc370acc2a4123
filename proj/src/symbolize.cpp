#include <map>
#include <set>

#include "pmx/lang.hpp"

namespace pmx {
namespace {

class Symbolizer {
 public:
  Diagnostics diags;

  ExprPtr expr(const ExprPtr& e) {
    if (const auto* v = as<Var>(e)) {
      auto it = scope_.find(v->name);
      if (it == scope_.end()) {
        diags.push_back({DiagKind::TypeError, std::nullopt, e->span, "unbound variable " + v->name.text});
        return e;
      }
      return withNode(e, Var{it->second});
    }
    if (const auto* l = as<Lam>(e)) {
      Frame f(*this);
      Lam c = *l;
      c.param = f.bind(l->param);
      c.body = expr(l->body);
      return withNode(e, c);
    }
    if (const auto* l = as<Let>(e)) {
      Let c = *l;
      c.bound = expr(l->bound);
      Frame f(*this);
      c.name = f.bind(l->name);
      c.body = expr(l->body);
      return withNode(e, c);
    }
    if (const auto* r = as<RecLets>(e)) {
      RecLets c = *r;
      Frame f(*this);
      for (auto& b : c.bindings) b.name = f.bind(b.name);
      for (auto& b : c.bindings) b.body = expr(b.body);
      c.body = expr(r->body);
      return withNode(e, c);
    }
    if (const auto* m = as<Match>(e)) {
      Match c = *m;
      c.target = expr(m->target);
      c.els = expr(m->els);
      Frame f(*this);
      std::set<std::string> seen;
      c.pat = pattern(m->pat, f, seen);
      c.thn = expr(m->thn);
      return withNode(e, c);
    }
    return mapChildren(e, [&](const ExprPtr& c) { return expr(c); });
  }

 private:
  std::map<Name, Name> scope_;

  struct Frame {
    Symbolizer& s;
    std::vector<std::pair<Name, std::optional<Name>>> saved;
    explicit Frame(Symbolizer& sym) : s(sym) {}
    ~Frame() {
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        if (it->second) {
          s.scope_[it->first] = *it->second;
        } else {
          s.scope_.erase(it->first);
        }
      }
    }
    Name bind(const Name& old) {
      Name fresh = freshName(old.text);
      if (old.text == "_") return fresh;
      auto it = s.scope_.find(old);
      saved.emplace_back(old, it == s.scope_.end() ? std::nullopt : std::optional<Name>(it->second));
      s.scope_[old] = fresh;
      return fresh;
    }
  };

  PatternPtr pattern(const PatternPtr& p, Frame& f, std::set<std::string>& seen) {
    if (const auto* v = std::get_if<PVar>(&p->node)) {
      if (v->name.text != "_" && !seen.insert(v->name.text).second) {
        diags.push_back({DiagKind::TypeError, std::nullopt, p->span,
                         "variable " + v->name.text + " is bound twice in one pattern"});
      }
      return mkPat(PVar{f.bind(v->name)}, p->span, p->type);
    }
    if (const auto* r = std::get_if<PRecord>(&p->node)) {
      PRecord c = *r;
      for (auto& [_, sub] : c.fields) sub = pattern(sub, f, seen);
      return mkPat(std::move(c), p->span, p->type);
    }
    return p;
  }
};

}  // namespace

Outcome<ExprPtr> symbolize(const ExprPtr& e) {
  Symbolizer s;
  ExprPtr out = s.expr(e);
  if (!s.diags.empty()) return s.diags;
  return out;
}

}  // namespace pmx
