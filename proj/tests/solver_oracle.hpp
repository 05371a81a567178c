// Copyright 2026 The edgeprune Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

// Exhaustive grid search used as an independent check of solve_ratios.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace edgeprune::testing {

struct OracleCurve {
  double alpha;
  double beta;
};

struct OracleResult {
  std::vector<double> ratios;
  double accuracy;
  double total_latency;
  double bottleneck;
};

inline double oracle_stage(const OracleCurve& c, double p) { return std::max(0.0, c.alpha * p + c.beta); }

inline double oracle_accuracy(const std::vector<double>& gamma, double delta, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += gamma[i] * p[i];
  return 1.0 / (1.0 + std::exp(-(s - delta)));
}

// Enumerates every grid vector. Feasible means accuracy >= a_min and every
// stage at or under the target; the preferred vector keeps the most accuracy,
// then the lowest total latency.
inline std::optional<OracleResult> grid_oracle(const std::vector<OracleCurve>& curves,
                                               const std::vector<double>& gamma, double delta, double a_min,
                                               double target, const std::vector<double>& grid) {
  const std::size_t n = curves.size();
  std::vector<std::size_t> idx(n, 0);
  std::optional<OracleResult> best;
  for (;;) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = grid[idx[i]];
    const double acc = oracle_accuracy(gamma, delta, p);
    double total = 0, worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = oracle_stage(curves[i], p[i]);
      total += t;
      worst = std::max(worst, t);
    }
    if (acc >= a_min && worst <= target) {
      if (!best || acc > best->accuracy || (acc == best->accuracy && total < best->total_latency)) {
        best = OracleResult{p, acc, total, worst};
      }
    }
    std::size_t k = 0;
    while (k < n && ++idx[k] == grid.size()) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

inline double max_grid_step(const std::vector<double>& grid) {
  double step = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) step = std::max(step, grid[g] - grid[g - 1]);
  return step;
}

}  // namespace edgeprune::testing
