#pragma once

#include <optional>
#include <string_view>

namespace pmx {

enum class Builtin {
  // integer arithmetic
  Addi, Subi, Muli, Divi, Modi, Negi,
  // float arithmetic
  Addf, Subf, Mulf, Divf, Negf,
  // comparison
  Eqi, Neqi, Lti, Gti, Leqi, Geqi, Eqf, Ltf, Gtf, Leqf, Geqf,
  // conversion
  Int2Float, Floor, Int2String, Float2String,
  // float math
  Exp, Log, Sin, Cos, Sqrt,
  // sequences
  Create, Length, Get, Set, Concat, Foldl, Reverse,
  // tensors
  TensorCreate, TensorGet, TensorSet, TensorSub, TensorShape,
  // effects (host only)
  Print, ReadFile, WriteFile,
};

struct BuiltinInfo {
  Builtin op;
  std::string_view name;
  int arity;
  bool effectful;
  bool tensor;  // operates on tensors
};

const BuiltinInfo& builtinInfo(Builtin b);
std::optional<Builtin> builtinByName(std::string_view name);

// All builtins, in declaration order.
const BuiltinInfo* builtinTableBegin();
const BuiltinInfo* builtinTableEnd();

}  // namespace pmx
