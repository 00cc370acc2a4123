#include "pmx/builtins.hpp"

#include <array>

namespace pmx {
namespace {

constexpr std::array kTable = {
    BuiltinInfo{Builtin::Addi, "addi", 2, false, false},
    BuiltinInfo{Builtin::Subi, "subi", 2, false, false},
    BuiltinInfo{Builtin::Muli, "muli", 2, false, false},
    BuiltinInfo{Builtin::Divi, "divi", 2, false, false},
    BuiltinInfo{Builtin::Modi, "modi", 2, false, false},
    BuiltinInfo{Builtin::Negi, "negi", 1, false, false},
    BuiltinInfo{Builtin::Addf, "addf", 2, false, false},
    BuiltinInfo{Builtin::Subf, "subf", 2, false, false},
    BuiltinInfo{Builtin::Mulf, "mulf", 2, false, false},
    BuiltinInfo{Builtin::Divf, "divf", 2, false, false},
    BuiltinInfo{Builtin::Negf, "negf", 1, false, false},
    BuiltinInfo{Builtin::Eqi, "eqi", 2, false, false},
    BuiltinInfo{Builtin::Neqi, "neqi", 2, false, false},
    BuiltinInfo{Builtin::Lti, "lti", 2, false, false},
    BuiltinInfo{Builtin::Gti, "gti", 2, false, false},
    BuiltinInfo{Builtin::Leqi, "leqi", 2, false, false},
    BuiltinInfo{Builtin::Geqi, "geqi", 2, false, false},
    BuiltinInfo{Builtin::Eqf, "eqf", 2, false, false},
    BuiltinInfo{Builtin::Ltf, "ltf", 2, false, false},
    BuiltinInfo{Builtin::Gtf, "gtf", 2, false, false},
    BuiltinInfo{Builtin::Leqf, "leqf", 2, false, false},
    BuiltinInfo{Builtin::Geqf, "geqf", 2, false, false},
    BuiltinInfo{Builtin::Int2Float, "int2float", 1, false, false},
    BuiltinInfo{Builtin::Floor, "floor", 1, false, false},
    BuiltinInfo{Builtin::Int2String, "int2string", 1, false, false},
    BuiltinInfo{Builtin::Float2String, "float2string", 1, false, false},
    BuiltinInfo{Builtin::Exp, "exp", 1, false, false},
    BuiltinInfo{Builtin::Log, "log", 1, false, false},
    BuiltinInfo{Builtin::Sin, "sin", 1, false, false},
    BuiltinInfo{Builtin::Cos, "cos", 1, false, false},
    BuiltinInfo{Builtin::Sqrt, "sqrt", 1, false, false},
    BuiltinInfo{Builtin::Create, "create", 2, false, false},
    BuiltinInfo{Builtin::Length, "length", 1, false, false},
    BuiltinInfo{Builtin::Get, "get", 2, false, false},
    BuiltinInfo{Builtin::Set, "set", 3, false, false},
    BuiltinInfo{Builtin::Concat, "concat", 2, false, false},
    BuiltinInfo{Builtin::Foldl, "foldl", 3, false, false},
    BuiltinInfo{Builtin::Reverse, "reverse", 1, false, false},
    BuiltinInfo{Builtin::TensorCreate, "tensorCreate", 2, false, true},
    BuiltinInfo{Builtin::TensorGet, "tensorGet", 2, false, true},
    BuiltinInfo{Builtin::TensorSet, "tensorSet", 3, false, true},
    BuiltinInfo{Builtin::TensorSub, "tensorSub", 3, false, true},
    BuiltinInfo{Builtin::TensorShape, "tensorShape", 1, false, true},
    BuiltinInfo{Builtin::Print, "print", 1, true, false},
    BuiltinInfo{Builtin::ReadFile, "readFile", 1, true, false},
    BuiltinInfo{Builtin::WriteFile, "writeFile", 2, true, false},
};

}  // namespace

const BuiltinInfo& builtinInfo(Builtin b) { return kTable[static_cast<std::size_t>(b)]; }

std::optional<Builtin> builtinByName(std::string_view name) {
  for (const auto& info : kTable) {
    if (info.name == name) return info.op;
  }
  return std::nullopt;
}

const BuiltinInfo* builtinTableBegin() { return kTable.data(); }
const BuiltinInfo* builtinTableEnd() { return kTable.data() + kTable.size(); }

}  // namespace pmx
