#include "pmx/ast.hpp"

#include <atomic>
#include <functional>
#include <map>

namespace pmx {

std::size_t NameHash::operator()(const Name& n) const noexcept {
  if (n.uid != 0) return std::hash<std::uint64_t>{}(n.uid);
  return std::hash<std::string>{}(n.text);
}

Name freshName(std::string text) {
  static std::atomic<std::uint64_t> next{1};
  return Name{std::move(text), next.fetch_add(1, std::memory_order_relaxed)};
}

ExprPtr withNode(const ExprPtr& e, ExprNode node) { return mk(std::move(node), e->span, e->type); }

std::pair<ExprPtr, std::vector<ExprPtr>> appSpine(const ExprPtr& e) {
  std::vector<ExprPtr> args;
  ExprPtr head = e;
  while (const auto* app = as<App>(head)) {
    args.push_back(app->arg);
    head = app->fn;
  }
  return {head, {args.rbegin(), args.rend()}};
}

ExprPtr mkApps(ExprPtr head, const std::vector<ExprPtr>& args, Span span) {
  ExprPtr e = std::move(head);
  for (const auto& a : args) {
    std::optional<Type> t;
    if (e->type && e->type->isArrow()) t = e->type->result();
    e = mk(App{e, a}, span, t);
  }
  return e;
}

ExprPtr mkUnit(Span span) { return mk(RecordLit{}, span, Type::unit()); }

namespace {

class AlphaComparer {
 public:
  bool expr(const ExprPtr& a, const ExprPtr& b) {
    if (a->node.index() != b->node.index()) return false;
    return std::visit([&](const auto& x) { return node(x, b); }, a->node);
  }

 private:
  std::map<Name, Name> left_, right_;

  struct Scope {
    AlphaComparer& c;
    std::vector<std::tuple<Name, std::optional<Name>, Name, std::optional<Name>>> saved;
    ~Scope() {
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
        auto& [a, oldA, b, oldB] = *it;
        restore(c.left_, a, oldA);
        restore(c.right_, b, oldB);
      }
    }
    static void restore(std::map<Name, Name>& m, const Name& k, const std::optional<Name>& v) {
      if (v) {
        m[k] = *v;
      } else {
        m.erase(k);
      }
    }
    void bind(const Name& a, const Name& b) {
      auto la = c.left_.find(a);
      auto rb = c.right_.find(b);
      saved.emplace_back(a, la == c.left_.end() ? std::nullopt : std::optional<Name>(la->second),
                         b, rb == c.right_.end() ? std::nullopt : std::optional<Name>(rb->second));
      c.left_[a] = b;
      c.right_[b] = a;
    }
  };

  bool sameVar(const Name& a, const Name& b) const {
    auto la = left_.find(a);
    auto rb = right_.find(b);
    if (la == left_.end() && rb == right_.end()) return a == b;
    return la != left_.end() && rb != right_.end() && la->second == b && rb->second == a;
  }

  static bool sameAnnot(const std::optional<Type>& a, const std::optional<Type>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b;
  }

  bool pattern(const PatternPtr& a, const PatternPtr& b, Scope& scope) {
    if (a->node.index() != b->node.index()) return false;
    if (const auto* pa = std::get_if<PVar>(&a->node)) {
      scope.bind(pa->name, std::get<PVar>(b->node).name);
      return true;
    }
    if (const auto* pa = std::get_if<PConst>(&a->node)) {
      return pa->value == std::get<PConst>(b->node).value;
    }
    const auto& ra = std::get<PRecord>(a->node);
    const auto& rb = std::get<PRecord>(b->node);
    if (ra.fields.size() != rb.fields.size()) return false;
    for (std::size_t i = 0; i < ra.fields.size(); ++i) {
      if (ra.fields[i].first != rb.fields[i].first) return false;
      if (!pattern(ra.fields[i].second, rb.fields[i].second, scope)) return false;
    }
    return true;
  }

  bool node(const Var& a, const ExprPtr& b) { return sameVar(a.name, std::get<Var>(b->node).name); }
  bool node(const Lit& a, const ExprPtr& b) { return a.value == std::get<Lit>(b->node).value; }
  bool node(const Lam& a, const ExprPtr& b) {
    const auto& o = std::get<Lam>(b->node);
    if (!sameAnnot(a.paramType, o.paramType)) return false;
    Scope s{*this, {}};
    s.bind(a.param, o.param);
    return expr(a.body, o.body);
  }
  bool node(const App& a, const ExprPtr& b) {
    const auto& o = std::get<App>(b->node);
    return expr(a.fn, o.fn) && expr(a.arg, o.arg);
  }
  bool node(const Let& a, const ExprPtr& b) {
    const auto& o = std::get<Let>(b->node);
    if (!sameAnnot(a.annot, o.annot) || !expr(a.bound, o.bound)) return false;
    Scope s{*this, {}};
    s.bind(a.name, o.name);
    return expr(a.body, o.body);
  }
  bool node(const RecLets& a, const ExprPtr& b) {
    const auto& o = std::get<RecLets>(b->node);
    if (a.bindings.size() != o.bindings.size()) return false;
    Scope s{*this, {}};
    for (std::size_t i = 0; i < a.bindings.size(); ++i) s.bind(a.bindings[i].name, o.bindings[i].name);
    for (std::size_t i = 0; i < a.bindings.size(); ++i) {
      if (!sameAnnot(a.bindings[i].annot, o.bindings[i].annot)) return false;
      if (!expr(a.bindings[i].body, o.bindings[i].body)) return false;
    }
    return expr(a.body, o.body);
  }
  bool node(const Match& a, const ExprPtr& b) {
    const auto& o = std::get<Match>(b->node);
    if (!expr(a.target, o.target) || !expr(a.els, o.els)) return false;
    Scope s{*this, {}};
    return pattern(a.pat, o.pat, s) && expr(a.thn, o.thn);
  }
  bool node(const Never&, const ExprPtr&) { return true; }
  bool node(const RecordLit& a, const ExprPtr& b) {
    const auto& o = std::get<RecordLit>(b->node);
    if (a.fields.size() != o.fields.size()) return false;
    for (std::size_t i = 0; i < a.fields.size(); ++i) {
      if (a.fields[i].first != o.fields[i].first) return false;
      if (!expr(a.fields[i].second, o.fields[i].second)) return false;
    }
    return true;
  }
  bool node(const SeqLit& a, const ExprPtr& b) {
    const auto& o = std::get<SeqLit>(b->node);
    if (a.elems.size() != o.elems.size()) return false;
    for (std::size_t i = 0; i < a.elems.size(); ++i) {
      if (!expr(a.elems[i], o.elems[i])) return false;
    }
    return true;
  }
  bool node(const Accelerate& a, const ExprPtr& b) {
    return expr(a.body, std::get<Accelerate>(b->node).body);
  }
  bool node(const Map& a, const ExprPtr& b) {
    const auto& o = std::get<Map>(b->node);
    return expr(a.fn, o.fn) && expr(a.seq, o.seq);
  }
  bool node(const Map2& a, const ExprPtr& b) {
    const auto& o = std::get<Map2>(b->node);
    return expr(a.fn, o.fn) && expr(a.lhs, o.lhs) && expr(a.rhs, o.rhs);
  }
  bool node(const Reduce& a, const ExprPtr& b) {
    const auto& o = std::get<Reduce>(b->node);
    return expr(a.fn, o.fn) && expr(a.acc, o.acc) && expr(a.seq, o.seq);
  }
  bool node(const Flatten& a, const ExprPtr& b) { return expr(a.seq, std::get<Flatten>(b->node).seq); }
  bool node(const Loop& a, const ExprPtr& b) {
    const auto& o = std::get<Loop>(b->node);
    return expr(a.count, o.count) && expr(a.fn, o.fn);
  }
};

}  // namespace

bool alphaEqual(const ExprPtr& a, const ExprPtr& b) {
  AlphaComparer c;
  return c.expr(a, b);
}

std::size_t countNodes(const ExprPtr& e) {
  std::size_t n = 1;
  forEachChild(*e, [&](const ExprPtr& c) { n += countNodes(c); });
  return n;
}

}  // namespace pmx
