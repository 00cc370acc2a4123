#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "pmx/runtime.hpp"

namespace oracle {

// The integer hash used by the case-study programs to generate data.
std::int64_t lcg(std::int64_t x);
std::int64_t rnd(std::int64_t seed, std::int64_t i);

struct ViterbiResult {
  std::vector<std::int64_t> path;
  double logp = 0;
};
// Direct DP over the model built by programs/viterbi.pmx.
ViterbiResult viterbi();

using State = std::array<double, 4>;
// One RK4 trace (101 states) for parameter index i of programs/ode.pmx.
std::vector<State> odeTrace(int i);

struct NnData {
  std::vector<std::vector<double>> xs;
  std::vector<std::int64_t> ys;
  std::vector<std::vector<double>> w;
  std::vector<double> b;
};
NnData nnData();
double nnLoss(const NnData& d);
// Central differences of nnLoss for every weight (8 x 16) and bias.
struct NnGrads {
  std::vector<std::vector<double>> dw;
  std::vector<double> db;
};
NnGrads nnFiniteDifferences(const NnData& d, double eps);

// Union of half-open intervals computed cell by cell.
std::vector<pmx::Interval> bitmapUnion(const std::vector<pmx::Interval>& in);

// Names reachable from roots over edges (including the roots themselves).
std::set<int> reachable(const std::set<int>& roots, const std::map<int, std::set<int>>& edges);

}  // namespace oracle
