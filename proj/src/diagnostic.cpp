#include "pmx/diagnostic.hpp"

namespace pmx {

std::string_view diagKindName(DiagKind k) {
  switch (k) {
    case DiagKind::ParseError:
      return "parse error";
    case DiagKind::TypeError:
      return "type error";
    case DiagKind::ClassifyError:
      return "classification error";
    case DiagKind::WellFormedError:
      return "well-formedness error";
    case DiagKind::RuntimeError:
      return "runtime error";
  }
  return "error";
}

std::string render(const Diagnostic& d, std::string_view file) {
  std::string out{file};
  out += ':' + std::to_string(d.span.line) + ':' + std::to_string(d.span.col) + ": ";
  if (d.rule) {
    out += '[' + *d.rule + "] ";
  } else {
    out += std::string(diagKindName(d.kind)) + ": ";
  }
  out += d.message;
  return out;
}

Diagnostic RuntimeError::diagnostic() const {
  std::optional<std::string> rule;
  if (!assumption_.empty()) rule = "assumption: " + assumption_;
  return Diagnostic{DiagKind::RuntimeError, rule, span_, what()};
}

}  // namespace pmx
