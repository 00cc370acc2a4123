#include "pmx/classify.hpp"

#include "pmx/extraction.hpp"

namespace pmx {

std::string_view verdictName(Verdict v) {
  switch (v) {
    case Verdict::Any:
      return "Any";
    case Verdict::Futhark:
      return "Futhark";
    case Verdict::Cuda:
      return "CUDA";
    case Verdict::Invalid:
      return "Invalid";
  }
  return "?";
}

int countFutharkExprs(const ExprPtr& e) {
  int n = (is<Map>(e) || is<Map2>(e) || is<Reduce>(e) || is<Flatten>(e)) ? 1 : 0;
  forEachChild(*e, [&](const ExprPtr& c) { n += countFutharkExprs(c); });
  return n;
}

int countCudaExprs(const ExprPtr& e) {
  int n = is<Loop>(e) ? 1 : 0;
  forEachChild(*e, [&](const ExprPtr& c) { n += countCudaExprs(c); });
  return n;
}

namespace {

void accumulate(const Name& x, const std::map<Name, ExprPtr>& bodies, std::set<Name>& visited, Counts& c) {
  auto it = bodies.find(x);
  if (it == bodies.end() || !visited.insert(x).second) return;
  c.fut += countFutharkExprs(it->second);
  c.cu += countCudaExprs(it->second);
  for (const auto& y : freeVars(it->second)) accumulate(y, bodies, visited, c);
}

}  // namespace

std::map<Name, Span> bindingSpans(const ExprPtr& program) {
  std::map<Name, Span> out;
  ExprPtr cur = program;
  for (;;) {
    if (const auto* l = as<Let>(cur)) {
      out[l->name] = cur->span;
      cur = l->body;
    } else if (const auto* r = as<RecLets>(cur)) {
      for (const auto& b : r->bindings) out[b.name] = b.span;
      cur = r->body;
    } else {
      return out;
    }
  }
}

Counts transitiveCounts(const Name& x, const std::map<Name, ExprPtr>& bodies) {
  Counts c;
  std::set<Name> visited;
  accumulate(x, bodies, visited, c);
  return c;
}

Verdict classifyCounts(Counts c) {
  if (c.fut == 0 && c.cu == 0) return Verdict::Any;
  if (c.fut > 0 && c.cu == 0) return Verdict::Futhark;
  if (c.fut == 0) return Verdict::Cuda;
  return Verdict::Invalid;
}

Verdict classifyBinding(const Name& x, const std::map<Name, ExprPtr>& bodies) {
  return classifyCounts(transitiveCounts(x, bodies));
}

std::map<Name, ExprPtr> bindingBodies(const ExprPtr& program) {
  std::map<Name, ExprPtr> out;
  ExprPtr cur = program;
  for (;;) {
    if (const auto* l = as<Let>(cur)) {
      out[l->name] = l->bound;
      cur = l->body;
    } else if (const auto* r = as<RecLets>(cur)) {
      for (const auto& b : r->bindings) out[b.name] = b.body;
      cur = r->body;
    } else {
      return out;
    }
  }
}

Outcome<BackendSplit> splitBackends(const AccelSet& acc, const ExprPtr& eAcc) {
  auto bodies = bindingBodies(eAcc);
  auto spans = bindingSpans(eAcc);
  BackendSplit split;
  Diagnostics diags;
  // Report in program order.
  for (const auto& n : topLevelNames(eAcc)) {
    if (!acc.contains(n)) continue;
    Counts c = transitiveCounts(n, bodies);
    Verdict v = classifyCounts(c);
    split.counts[n] = c;
    split.verdicts[n] = v;
    if (v == Verdict::Futhark) split.futIdents.insert(n);
    if (v == Verdict::Cuda) split.cuIdents.insert(n);
    if (v == Verdict::Any) {
      diags.push_back({DiagKind::ClassifyError, std::nullopt, spans[n],
                       "accelerated code does not use any parallel expressions"});
    } else if (v == Verdict::Invalid) {
      diags.push_back({DiagKind::ClassifyError, std::nullopt, spans[n],
                       "accelerated code uses parallel expressions unique to both backends (" +
                           std::to_string(c.fut) + " Futhark, " + std::to_string(c.cu) + " CUDA)"});
    }
  }
  if (!diags.empty()) return diags;
  split.futProgram = extract(split.futIdents, eAcc).program;
  split.cuProgram = extract(split.cuIdents, eAcc).program;

  // Soundness: no CUDA construct in the Futhark program and vice versa.
  for (const auto& [n, body] : bindingBodies(split.futProgram)) {
    if (countCudaExprs(body) != 0) {
      diags.push_back({DiagKind::ClassifyError, std::nullopt, spans[n],
                       "internal: binding " + n.text + " in the Futhark program contains loop"});
    }
  }
  for (const auto& [n, body] : bindingBodies(split.cuProgram)) {
    if (countFutharkExprs(body) != 0) {
      diags.push_back({DiagKind::ClassifyError, std::nullopt, spans[n],
                       "internal: binding " + n.text + " in the CUDA program contains Futhark constructs"});
    }
  }
  if (!diags.empty()) return diags;
  return split;
}

}  // namespace pmx
