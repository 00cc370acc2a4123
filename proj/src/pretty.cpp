#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "pmx/lang.hpp"
#include "utf8.hpp"

namespace pmx {
namespace {

std::string pad(int n) { return std::string(static_cast<std::size_t>(n), ' '); }
bool multiline(const std::string& s) { return s.find('\n') != std::string::npos; }

std::string escapeChar(char32_t c, char quote) {
  switch (c) {
    case U'\n':
      return "\\n";
    case U'\t':
      return "\\t";
    case U'\r':
      return "\\r";
    case U'\0':
      return "\\0";
    case U'\\':
      return "\\\\";
    default:
      break;
  }
  if (c == static_cast<char32_t>(quote)) return std::string("\\") + quote;
  if (c < 0x20 || c == 0x7F || (c >= 0xD800 && c <= 0xDFFF) || c > 0x10FFFF) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "\\u{%X}", static_cast<unsigned>(c));
    return buf;
  }
  std::string out;
  utf8::encode(c, out);
  return out;
}

std::string floatText(double v) {
  if (std::isnan(v)) return "(divf 0.0 0.0)";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string constText(const Const& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return floatText(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, char32_t>) {
          return "'" + escapeChar(v, '\'') + "'";
        } else {
          return std::string(builtinInfo(v).name);
        }
      },
      c.value);
}

// e is `match t with {l = x} then x else never`.
const std::string* projectionLabel(const Match& m) {
  const auto* rec = std::get_if<PRecord>(&m.pat->node);
  if (!rec || rec->fields.size() != 1) return nullptr;
  const auto* pv = std::get_if<PVar>(&rec->fields[0].second->node);
  if (!pv || pv->name.text == "_") return nullptr;
  const auto* v = as<Var>(m.thn);
  if (!v || !(v->name == pv->name) || !is<Never>(m.els)) return nullptr;
  return &rec->fields[0].first;
}

bool isParallel(const ExprPtr& e) {
  return is<Accelerate>(e) || is<Map>(e) || is<Map2>(e) || is<Reduce>(e) || is<Flatten>(e) ||
         is<Loop>(e);
}

class Printer {
 public:
  explicit Printer(const ExprPtr& root) {
    collectBinders(root);
    collectFree(root);
    for (const auto& n : binderOrder_) assign(n);
  }

  const std::unordered_map<Name, std::string, NameHash>& display() const { return display_; }

  std::string top(const ExprPtr& e, int ind) {
    if (const auto* l = as<Let>(e)) {
      std::string head = "let " + name(l->name) + annot(l->annot) + " =";
      std::string b = top(l->bound, ind + 2);
      std::string body = top(l->body, ind);
      if (!multiline(b)) return head + " " + b + " in\n" + pad(ind) + body;
      return head + "\n" + pad(ind + 2) + b + "\n" + pad(ind) + "in\n" + pad(ind) + body;
    }
    if (const auto* r = as<RecLets>(e)) {
      std::string out = "recursive";
      for (const auto& b : r->bindings) {
        out += "\n" + pad(ind + 2) + "let " + name(b.name) + annot(b.annot) + " =";
        std::string body = top(b.body, ind + 4);
        if (multiline(body)) {
          out += "\n" + pad(ind + 4) + body;
        } else {
          out += " " + body;
        }
      }
      return out + "\n" + pad(ind) + "in\n" + pad(ind) + top(r->body, ind);
    }
    if (const auto* l = as<Lam>(e)) {
      std::string head = "lam " + name(l->param) + annot(l->paramType) + ".";
      std::string body = top(l->body, ind + 2);
      if (multiline(body)) return head + "\n" + pad(ind + 2) + body;
      return head + " " + body;
    }
    if (const auto* m = as<Match>(e)) {
      if (projectionLabel(*m)) return app(e, ind);
      std::string t = top(m->target, ind + 2);
      std::string p = pattern(m->pat);
      std::string a = top(m->thn, ind + 2);
      std::string b = top(m->els, ind + 2);
      std::string head = "match " + t + " with " + p + " then";
      if (!multiline(t) && !multiline(a) && !multiline(b) && head.size() + a.size() + b.size() < 80) {
        return head + " " + a + " else " + b;
      }
      return head + "\n" + pad(ind + 2) + a + "\n" + pad(ind) + "else\n" + pad(ind + 2) + b;
    }
    return app(e, ind);
  }

 private:
  std::unordered_map<Name, std::string, NameHash> display_;
  std::unordered_set<Name, NameHash> binders_;
  std::vector<Name> binderOrder_;
  std::set<std::string> taken_;
  std::unordered_map<std::string, int> nextSuffix_;

  void addBinder(const Name& n) {
    if (n.text == "_") return;
    if (binders_.insert(n).second) binderOrder_.push_back(n);
  }

  void collectPattern(const PatternPtr& p) {
    if (const auto* v = std::get_if<PVar>(&p->node)) {
      addBinder(v->name);
    } else if (const auto* r = std::get_if<PRecord>(&p->node)) {
      for (const auto& [_, sub] : r->fields) collectPattern(sub);
    }
  }

  void collectBinders(const ExprPtr& e) {
    if (const auto* l = as<Lam>(e)) addBinder(l->param);
    if (const auto* l = as<Let>(e)) addBinder(l->name);
    if (const auto* r = as<RecLets>(e)) {
      for (const auto& b : r->bindings) addBinder(b.name);
    }
    if (const auto* m = as<Match>(e)) collectPattern(m->pat);
    forEachChild(*e, [&](const ExprPtr& c) { collectBinders(c); });
  }

  void collectFree(const ExprPtr& e) {
    if (const auto* v = as<Var>(e)) {
      if (!binders_.count(v->name)) {
        display_.emplace(v->name, v->name.text);
        taken_.insert(v->name.text);
      }
    }
    forEachChild(*e, [&](const ExprPtr& c) { collectFree(c); });
  }

  void assign(const Name& n) {
    if (display_.count(n)) return;
    std::string s = n.text;
    if (taken_.count(s)) {
      int& k = nextSuffix_[n.text];
      do {
        s = n.text + "#" + std::to_string(++k);
      } while (taken_.count(s));
    }
    taken_.insert(s);
    display_.emplace(n, s);
  }

  std::string name(const Name& n) {
    if (n.text == "_") return "_";
    auto it = display_.find(n);
    return it == display_.end() ? n.text : it->second;
  }

  static std::string annot(const std::optional<Type>& t) { return t ? " : " + t->str() : ""; }

  std::string pattern(const PatternPtr& p) {
    if (const auto* v = std::get_if<PVar>(&p->node)) return name(v->name);
    if (const auto* c = std::get_if<PConst>(&p->node)) return constText(c->value);
    const auto& r = std::get<PRecord>(p->node);
    std::string out = "{";
    for (std::size_t i = 0; i < r.fields.size(); ++i) {
      if (i) out += ", ";
      out += r.fields[i].first + " = " + pattern(r.fields[i].second);
    }
    return out + "}";
  }

  std::string parallel(const ExprPtr& e, int ind) {
    auto args = [&](std::string kw, std::initializer_list<ExprPtr> xs) {
      for (const auto& x : xs) kw += " " + atom(x, ind + 2);
      return kw;
    };
    if (const auto* a = as<Accelerate>(e)) return args("accelerate", {a->body});
    if (const auto* m = as<Map>(e)) return args("map", {m->fn, m->seq});
    if (const auto* m = as<Map2>(e)) return args("map2", {m->fn, m->lhs, m->rhs});
    if (const auto* r = as<Reduce>(e)) return args("reduce", {r->fn, r->acc, r->seq});
    if (const auto* f = as<Flatten>(e)) return args("flatten", {f->seq});
    const auto& l = std::get<Loop>(e->node);
    return args("loop", {l.count, l.fn});
  }

  std::string app(const ExprPtr& e, int ind) {
    if (isParallel(e)) return parallel(e, ind);
    if (!is<App>(e)) return atom(e, ind);
    auto [head, args] = appSpine(e);
    std::string out = isParallel(head) ? parallel(head, ind) : atom(head, ind);
    for (const auto& a : args) out += " " + atom(a, ind + 2);
    return out;
  }

  std::string atom(const ExprPtr& e, int ind) {
    if (const auto* v = as<Var>(e)) return name(v->name);
    if (const auto* l = as<Lit>(e)) {
      std::string s = constText(l->value);
      if (s[0] == '-') return "(" + s + ")";
      return s;
    }
    if (is<Never>(e)) return "never";
    if (const auto* r = as<RecordLit>(e)) {
      std::string out = "{";
      for (std::size_t i = 0; i < r->fields.size(); ++i) {
        if (i) out += ", ";
        out += r->fields[i].first + " = " + top(r->fields[i].second, ind + 2);
      }
      return out + "}";
    }
    if (const auto* s = as<SeqLit>(e)) {
      bool chars = !s->elems.empty();
      for (const auto& x : s->elems) {
        const auto* l = as<Lit>(x);
        chars = chars && l && std::holds_alternative<char32_t>(l->value.value);
      }
      if (chars) {
        std::string out = "\"";
        for (const auto& x : s->elems) out += escapeChar(std::get<char32_t>(as<Lit>(x)->value.value), '"');
        return out + "\"";
      }
      std::string out = "[";
      for (std::size_t i = 0; i < s->elems.size(); ++i) {
        if (i) out += ", ";
        out += top(s->elems[i], ind + 2);
      }
      return out + "]";
    }
    if (const auto* m = as<Match>(e)) {
      if (const auto* l = projectionLabel(*m)) return atom(m->target, ind) + "." + *l;
    }
    return "(" + top(e, ind + 1) + ")";
  }
};

}  // namespace

std::string prettyPrint(const ExprPtr& e) {
  Printer p(e);
  return p.top(e, 0);
}

std::map<Name, std::string> printedNames(const ExprPtr& e) {
  Printer p(e);
  return {p.display().begin(), p.display().end()};
}

}  // namespace pmx
