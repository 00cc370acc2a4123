#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

std::int64_t lcg(std::int64_t x) { return (x * 1103515245 + 12345) % 2147483648; }

std::int64_t rnd(std::int64_t seed, std::int64_t i) { return lcg(lcg(i * 7919 + seed)); }

namespace {

double weight(std::int64_t seed, std::int64_t i) { return static_cast<double>(1 + (rnd(seed, i) / 16) % 1000); }

std::vector<double> normLog(std::vector<double> row) {
  double tot = 0.0;
  for (double w : row) tot += w;
  for (double& w : row) w = std::log(w / tot);
  return row;
}

}  // namespace

ViterbiResult viterbi() {
  const int nS = 4, nO = 8, len = 64;
  std::vector<double> init(nS);
  for (int j = 0; j < nS; ++j) init[j] = weight(11, j);
  std::vector<double> logPi = normLog(init);
  std::vector<std::vector<double>> logA(nS), logB(nS);
  for (int i = 0; i < nS; ++i) {
    std::vector<double> ra(nS), rb(nO);
    for (int j = 0; j < nS; ++j) ra[j] = weight(23, i * nS + j);
    for (int o = 0; o < nO; ++o) rb[o] = weight(37, i * nO + o);
    logA[i] = normLog(ra);
    logB[i] = normLog(rb);
  }
  std::vector<int> obs(len);
  for (int t = 0; t < len; ++t) obs[t] = static_cast<int>((rnd(53, t) / 16) % nO);

  std::vector<double> delta(nS);
  for (int j = 0; j < nS; ++j) delta[j] = logPi[j] + logB[j][obs[0]];
  std::vector<std::vector<int>> back;
  for (int t = 1; t < len; ++t) {
    std::vector<double> next(nS);
    std::vector<int> bp(nS);
    for (int j = 0; j < nS; ++j) {
      double bestV = delta[0] + logA[0][j];
      int bestK = 0;
      for (int i = 0; i < nS; ++i) {
        double v = delta[i] + logA[i][j];
        if (v > bestV) {
          bestV = v;
          bestK = i;
        }
      }
      next[j] = bestV + logB[j][obs[t]];
      bp[j] = bestK;
    }
    delta = next;
    back.push_back(bp);
  }
  int last = 0;
  for (int i = 0; i < nS; ++i) {
    if (delta[i] > delta[last]) last = i;
  }
  ViterbiResult r;
  r.logp = delta[last];
  std::vector<std::int64_t> rev{last};
  for (auto it = back.rbegin(); it != back.rend(); ++it) rev.push_back((*it)[rev.back()]);
  r.path.assign(rev.rbegin(), rev.rend());
  return r;
}

namespace {

State deriv(double p, const State& x) {
  return {x[2], x[3], (-(p * std::sin(x[0])) - 0.1 * x[2]) + 0.05 * std::cos(x[1]),
          0.3 * (std::sin(x[0]) * x[2]) - 0.2 * x[3]};
}

State axpy(double a, const State& d, const State& x) {
  State r;
  for (int k = 0; k < 4; ++k) r[k] = x[k] + a * d[k];
  return r;
}

}  // namespace

std::vector<State> odeTrace(int i) {
  const double h = 0.01;
  const double p = 1.0 + 0.1 * static_cast<double>(i);
  State x{0.5, 0.0, 0.0, 0.1};
  std::vector<State> trace{x};
  for (int k = 0; k < 100; ++k) {
    State k1 = deriv(p, x);
    State k2 = deriv(p, axpy(0.5 * h, k1, x));
    State k3 = deriv(p, axpy(0.5 * h, k2, x));
    State k4 = deriv(p, axpy(h, k3, x));
    double w = h / 6.0;
    State n;
    for (int c = 0; c < 4; ++c) n[c] = x[c] + w * ((k1[c] + 2.0 * k2[c]) + (2.0 * k3[c] + k4[c]));
    x = n;
    trace.push_back(x);
  }
  return trace;
}

namespace {

double unit(std::int64_t seed, std::int64_t i) {
  return static_cast<double>((rnd(seed, i) / 16) % 2001) / 1000.0 - 1.0;
}

}  // namespace

NnData nnData() {
  const int nIn = 16, nOut = 8, nPts = 32;
  NnData d;
  d.xs.assign(nPts, std::vector<double>(nIn));
  for (int k = 0; k < nPts; ++k) {
    for (int j = 0; j < nIn; ++j) d.xs[k][j] = unit(5, k * nIn + j);
    d.ys.push_back((rnd(7, k) / 16) % nOut);
  }
  d.w.assign(nOut, std::vector<double>(nIn));
  for (int o = 0; o < nOut; ++o) {
    for (int j = 0; j < nIn; ++j) d.w[o][j] = 0.1 * unit(9, o * nIn + j);
    d.b.push_back(0.1 * unit(13, o));
  }
  return d;
}

double nnLoss(const NnData& d) {
  double total = 0;
  for (std::size_t k = 0; k < d.xs.size(); ++k) {
    std::vector<double> z(d.w.size());
    for (std::size_t o = 0; o < d.w.size(); ++o) {
      double s = d.b[o];
      for (std::size_t j = 0; j < d.xs[k].size(); ++j) s += d.w[o][j] * d.xs[k][j];
      z[o] = s;
    }
    double m = *std::max_element(z.begin(), z.end());
    double tot = 0;
    for (double v : z) tot += std::exp(v - m);
    total += -((z[static_cast<std::size_t>(d.ys[k])] - m) - std::log(tot));
  }
  return total / static_cast<double>(d.xs.size());
}

NnGrads nnFiniteDifferences(const NnData& d, double eps) {
  NnGrads g;
  NnData t = d;
  g.dw.assign(d.w.size(), std::vector<double>(d.w[0].size()));
  for (std::size_t o = 0; o < d.w.size(); ++o) {
    for (std::size_t j = 0; j < d.w[o].size(); ++j) {
      t.w[o][j] = d.w[o][j] + eps;
      double up = nnLoss(t);
      t.w[o][j] = d.w[o][j] - eps;
      double down = nnLoss(t);
      t.w[o][j] = d.w[o][j];
      g.dw[o][j] = (up - down) / (2 * eps);
    }
    t.b[o] = d.b[o] + eps;
    double up = nnLoss(t);
    t.b[o] = d.b[o] - eps;
    double down = nnLoss(t);
    t.b[o] = d.b[o];
    g.db.push_back((up - down) / (2 * eps));
  }
  return g;
}

std::vector<pmx::Interval> bitmapUnion(const std::vector<pmx::Interval>& in) {
  std::int64_t hi = 0;
  for (const auto& i : in) hi = std::max(hi, i.end);
  std::vector<bool> cells(static_cast<std::size_t>(hi), false);
  for (const auto& i : in) {
    for (auto k = i.start; k < i.end; ++k) cells[static_cast<std::size_t>(k)] = true;
  }
  std::vector<pmx::Interval> out;
  for (std::int64_t k = 0; k < hi; ++k) {
    if (!cells[static_cast<std::size_t>(k)]) continue;
    if (!out.empty() && out.back().end == k) {
      out.back().end = k + 1;
    } else {
      out.push_back({k, k + 1});
    }
  }
  return out;
}

std::set<int> reachable(const std::set<int>& roots, const std::map<int, std::set<int>>& edges) {
  std::set<int> seen;
  std::vector<int> work(roots.begin(), roots.end());
  while (!work.empty()) {
    int n = work.back();
    work.pop_back();
    if (!seen.insert(n).second) continue;
    auto it = edges.find(n);
    if (it == edges.end()) continue;
    for (int m : it->second) work.push_back(m);
  }
  return seen;
}

}  // namespace oracle
