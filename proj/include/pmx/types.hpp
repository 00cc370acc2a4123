#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace pmx {

enum class TypeKind { Int, Float, Bool, Char, Arrow, Record, Seq, Tensor };

// Immutable monomorphic type. Cheap to copy (shared representation).
// Unit is the empty record.
class Type {
 public:
  using Field = std::pair<std::string, Type>;

  static Type integer();
  static Type floating();
  static Type boolean();
  static Type character();
  static Type unit();
  static Type arrow(Type param, Type result);
  static Type record(std::vector<Field> fields);
  static Type seq(Type elem);
  static Type tensor(Type elem);
  static Type string() { return seq(character()); }

  // Curried arrow `params[0] -> ... -> result`.
  static Type arrows(const std::vector<Type>& params, Type result);

  TypeKind kind() const;
  bool isArrow() const { return kind() == TypeKind::Arrow; }
  bool isUnit() const { return kind() == TypeKind::Record && fields().empty(); }
  bool isScalar() const;

  const Type& param() const;   // Arrow
  const Type& result() const;  // Arrow
  const Type& elem() const;    // Seq / Tensor
  const std::vector<Field>& fields() const;  // Record, declaration order
  const Type* field(const std::string& label) const;

  // Peels leading arrows: `A -> B -> C` gives {A, B} and C.
  std::pair<std::vector<Type>, Type> uncurry() const;

  std::string str() const;

  // Structural; record comparison ignores field order.
  friend bool operator==(const Type& a, const Type& b);
  friend bool operator!=(const Type& a, const Type& b) { return !(a == b); }

 private:
  struct Rep;
  explicit Type(std::shared_ptr<const Rep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const Rep> rep_;
};

}  // namespace pmx
