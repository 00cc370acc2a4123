#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmx/ast.hpp"

namespace pmx {

enum class DiagKind { ParseError, TypeError, ClassifyError, WellFormedError, RuntimeError };

std::string_view diagKindName(DiagKind k);

struct Diagnostic {
  DiagKind kind;
  std::optional<std::string> rule;  // always set for WellFormedError
  Span span;
  std::string message;
};

// `<file>:<line>:<col>: [RULE] message` or `<file>:<line>:<col>: type error: message`.
std::string render(const Diagnostic& d, std::string_view file);

using Diagnostics = std::vector<Diagnostic>;

// A value or the diagnostics explaining why there is none.
template <class T>
class Outcome {
 public:
  Outcome(T value) : value_(std::move(value)) {}  // NOLINT: implicit by intent
  Outcome(Diagnostics diags) : diags_(std::move(diags)) {}  // NOLINT

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }
  const T& value() const& { return *value_; }
  T&& value() && { return std::move(*value_); }
  const T& operator*() const { return *value_; }
  const T* operator->() const { return &*value_; }
  const Diagnostics& diagnostics() const { return diags_; }

 private:
  std::optional<T> value_;
  Diagnostics diags_;
};

// Raised by the interpreter. `assumption` names a violated execution assumption
// (e.g. "regular-sequence", "tensor-rank") when the failure came from a runtime check.
class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(std::string message, Span span = {}, std::string assumption = {})
      : std::runtime_error(std::move(message)), span_(span), assumption_(std::move(assumption)) {}

  Span span() const { return span_; }
  const std::string& assumption() const { return assumption_; }
  Diagnostic diagnostic() const;

 private:
  Span span_;
  std::string assumption_;
};

}  // namespace pmx
