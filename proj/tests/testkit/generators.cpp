#include "generators.hpp"

#include <sstream>

namespace testkit {

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

DagProgram randomDag(std::mt19937_64& rng) {
  DagProgram d;
  d.size = pick(rng, 1, 24);
  std::ostringstream src;
  int i = 0;
  while (i < d.size) {
    int group = (pick(rng, 0, 4) == 0) ? std::min(pick(rng, 1, 3), d.size - i) : 0;
    int lo = i;
    int hi = group ? i + group : i + 1;
    if (group) src << "recursive\n";
    for (int k = lo; k < hi; ++k) {
      // Earlier bindings, or any member of the own group.
      std::set<int> refs;
      int count = pick(rng, 0, 3);
      for (int r = 0; r < count; ++r) {
        int limit = group ? hi - 1 : k - 1;
        if (limit < 0) break;
        refs.insert(pick(rng, 0, limit));
      }
      d.edges[k] = refs;
      src << "let b" << k << " = lam x : Int. ";
      std::string body = "x";
      for (int r : refs) body = "addi (b" + std::to_string(r) + " x) (" + body + ")";
      src << body << (group ? "\n" : " in\n");
    }
    if (group) src << "in\n";
    i = hi;
  }
  src << "{}\n";
  d.source = src.str();
  return d;
}

std::vector<pmx::Interval> randomIntervals(std::mt19937_64& rng) {
  std::vector<pmx::Interval> out;
  int n = pick(rng, 0, 12);
  for (int k = 0; k < n; ++k) {
    int s = pick(rng, 0, 62);
    int e = pick(rng, s + 1, std::min(64, s + 1 + pick(rng, 0, 16)));
    out.push_back({s, e});
  }
  return out;
}

std::string randomAliasProgram(std::mt19937_64& rng) {
  std::ostringstream src;
  int hosts = pick(rng, 1, 2);
  std::vector<int> sizes;
  for (int h = 0; h < hosts; ++h) {
    sizes.push_back(pick(rng, 4, 16));
    src << "let t" << h << " = tensorCreate [" << sizes[h] << "] (lam i. 0) in\n";
  }
  struct View {
    int host, ofs, len;
  };
  std::vector<View> views;
  int nv = pick(rng, 1, 5);
  for (int v = 0; v < nv; ++v) {
    int h = pick(rng, 0, hosts - 1);
    int ofs = pick(rng, 0, sizes[h] - 1);
    int len = pick(rng, 1, sizes[h] - ofs);
    views.push_back({h, ofs, len});
    src << "let v" << v << " = tensorSub t" << h << " " << ofs << " " << len << " in\n";
  }
  src << "let _ = accelerate (loop 1 (lam q.\n";
  int writes = pick(rng, 1, 8);
  for (int w = 0; w < writes; ++w) {
    int v = pick(rng, 0, nv - 1);
    int idx = pick(rng, 0, views[v].len - 1);
    src << "  let _ = tensorSet v" << v << " [" << idx << "] " << pick(rng, 1, 99) << " in\n";
  }
  src << "  {})) in\n";
  std::string cells = "\"\"";
  for (int h = 0; h < hosts; ++h) {
    for (int k = 0; k < sizes[h]; ++k) {
      cells = "concat (" + cells + ") (concat \" \" (int2string (tensorGet t" + std::to_string(h) + " [" +
              std::to_string(k) + "])))";
    }
  }
  src << "print (" << cells << ")\n";
  return src.str();
}

}  // namespace testkit
