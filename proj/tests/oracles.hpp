// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations shared by the unit tests and the
// acceptance runner.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "react/losses.hpp"

namespace react::testing {

inline Box from_corners(double x1, double y1, double x2, double y2) { return {(x1 + x2) / 2, (y1 + y2) / 2, x2 - x1, y2 - y1}; }

inline Box random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.1, 0.9), s(0.1, 0.5);
  return {c(rng), c(rng), s(rng), s(rng)};
}

// gIoU from counts of a 1000 x 1000 grid laid over the enclosing box.
inline double grid_giou(const Box& a, const Box& b) {
  const double x0 = std::min(a.x1(), b.x1()), x1 = std::max(a.x2(), b.x2());
  const double y0 = std::min(a.y1(), b.y1()), y1 = std::max(a.y2(), b.y2());
  const int n = 1000;
  long inter = 0, uni = 0;
  for (int i = 0; i < n; ++i) {
    const double x = x0 + (i + 0.5) * (x1 - x0) / n;
    for (int j = 0; j < n; ++j) {
      const double y = y0 + (j + 0.5) * (y1 - y0) / n;
      const bool ia = x >= a.x1() && x < a.x2() && y >= a.y1() && y < a.y2();
      const bool ib = x >= b.x1() && x < b.x2() && y >= b.y1() && y < b.y2();
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  const double hull = static_cast<double>(n) * n;
  return static_cast<double>(inter) / static_cast<double>(uni) - (hull - static_cast<double>(uni)) / hull;
}

// Minimum over all injections rows -> cols, lexicographically first on ties.
inline std::pair<double, std::vector<std::size_t>> brute_force(const std::vector<double>& cost, std::size_t m, std::size_t n) {
  std::vector<std::size_t> cols(n);
  std::iota(cols.begin(), cols.end(), 0);
  double best = 1e300;
  std::vector<std::size_t> arg;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += cost[i * n + cols[i]];
    std::vector<std::size_t> head(cols.begin(), cols.begin() + m);
    if (s < best - 1e-12 || (std::fabs(s - best) <= 1e-12 && head < arg)) {
      best = s;
      arg = head;
    }
  } while (std::next_permutation(cols.begin(), cols.end()));
  return {best, arg};
}

}  // namespace react::testing
