#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pmx/runtime.hpp"

namespace testkit {

// A program of top-level function bindings b0..b(n-1) whose references form a
// random DAG, with some consecutive runs grouped into mutually recursive lets.
struct DagProgram {
  std::string source;
  int size = 0;
  std::map<int, std::set<int>> edges;  // binding -> bindings its body mentions
};
DagProgram randomDag(std::mt19937_64& rng);

// Nonempty half-open intervals within [0, 64).
std::vector<pmx::Interval> randomIntervals(std::mt19937_64& rng);

// Views over one or two host tensors, written in a fixed order by a
// single-iteration kernel, then every host cell printed.
std::string randomAliasProgram(std::mt19937_64& rng);

}  // namespace testkit
