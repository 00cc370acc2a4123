#include "pmx/types.hpp"

#include <algorithm>
#include <cassert>

namespace pmx {

struct Type::Rep {
  TypeKind kind;
  std::vector<Type> args;  // Arrow: {param, result}; Seq/Tensor: {elem}
  std::vector<Field> fields;
};


Type Type::integer() {
  static const Type t{std::make_shared<const Rep>(Rep{TypeKind::Int, {}, {}})};
  return t;
}
Type Type::floating() {
  static const Type t{std::make_shared<const Rep>(Rep{TypeKind::Float, {}, {}})};
  return t;
}
Type Type::boolean() {
  static const Type t{std::make_shared<const Rep>(Rep{TypeKind::Bool, {}, {}})};
  return t;
}
Type Type::character() {
  static const Type t{std::make_shared<const Rep>(Rep{TypeKind::Char, {}, {}})};
  return t;
}
Type Type::unit() {
  static const Type t{std::make_shared<const Rep>(Rep{TypeKind::Record, {}, {}})};
  return t;
}
Type Type::arrow(Type param, Type result) {
  return Type{std::make_shared<const Rep>(
      Rep{TypeKind::Arrow, {std::move(param), std::move(result)}, {}})};
}
Type Type::record(std::vector<Field> fields) {
  if (fields.empty()) return unit();
  return Type{std::make_shared<const Rep>(Rep{TypeKind::Record, {}, std::move(fields)})};
}
Type Type::seq(Type elem) {
  return Type{std::make_shared<const Rep>(Rep{TypeKind::Seq, {std::move(elem)}, {}})};
}
Type Type::tensor(Type elem) {
  return Type{std::make_shared<const Rep>(Rep{TypeKind::Tensor, {std::move(elem)}, {}})};
}

Type Type::arrows(const std::vector<Type>& params, Type result) {
  Type t = std::move(result);
  for (auto it = params.rbegin(); it != params.rend(); ++it) t = arrow(*it, t);
  return t;
}

TypeKind Type::kind() const { return rep_->kind; }

bool Type::isScalar() const {
  switch (kind()) {
    case TypeKind::Int:
    case TypeKind::Float:
    case TypeKind::Bool:
    case TypeKind::Char:
      return true;
    default:
      return false;
  }
}

const Type& Type::param() const {
  assert(kind() == TypeKind::Arrow);
  return rep_->args[0];
}
const Type& Type::result() const {
  assert(kind() == TypeKind::Arrow);
  return rep_->args[1];
}
const Type& Type::elem() const {
  assert(kind() == TypeKind::Seq || kind() == TypeKind::Tensor);
  return rep_->args[0];
}
const std::vector<Type::Field>& Type::fields() const { return rep_->fields; }

const Type* Type::field(const std::string& label) const {
  for (const auto& [l, t] : rep_->fields) {
    if (l == label) return &t;
  }
  return nullptr;
}

std::pair<std::vector<Type>, Type> Type::uncurry() const {
  std::vector<Type> params;
  Type t = *this;
  while (t.isArrow()) {
    params.push_back(t.param());
    Type next = t.result();
    t = next;
  }
  return {params, t};
}

std::string Type::str() const {
  switch (kind()) {
    case TypeKind::Int:
      return "Int";
    case TypeKind::Float:
      return "Float";
    case TypeKind::Bool:
      return "Bool";
    case TypeKind::Char:
      return "Char";
    case TypeKind::Arrow: {
      std::string p = param().str();
      if (param().isArrow()) p = "(" + p + ")";
      return p + " -> " + result().str();
    }
    case TypeKind::Record: {
      std::string s = "{";
      for (std::size_t i = 0; i < fields().size(); ++i) {
        if (i) s += ", ";
        s += fields()[i].first + " : " + fields()[i].second.str();
      }
      return s + "}";
    }
    case TypeKind::Seq:
      return "[" + elem().str() + "]";
    case TypeKind::Tensor:
      return "Tensor[" + elem().str() + "]";
  }
  return "?";
}

bool operator==(const Type& a, const Type& b) {
  if (a.rep_ == b.rep_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TypeKind::Arrow:
      return a.param() == b.param() && a.result() == b.result();
    case TypeKind::Seq:
    case TypeKind::Tensor:
      return a.elem() == b.elem();
    case TypeKind::Record: {
      if (a.fields().size() != b.fields().size()) return false;
      for (const auto& [l, t] : a.fields()) {
        const Type* other = b.field(l);
        if (!other || !(*other == t)) return false;
      }
      return true;
    }
    default:
      return true;
  }
}

}  // namespace pmx
