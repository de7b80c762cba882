// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "react/tensor.hpp"

namespace react::testing {

inline Tensor uniform(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = u(rng);
  return Tensor::from(std::move(shape), std::move(v), grad);
}

inline std::size_t uniform_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace react::testing

#include "react/nn.hpp"

namespace react::testing {

inline Linear identity_linear(std::size_t d) {
  std::vector<double> w(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + i] = 1.0;
  return {Tensor::from({d, d}, w, true), Tensor::zeros({d}, true)};
}

inline AttentionParams identity_attention(std::size_t d, std::size_t heads = 1) {
  AttentionParams p;
  p.num_heads = heads;
  p.d_model = d;
  p.wq = identity_linear(d);
  p.wk = identity_linear(d);
  p.wv = identity_linear(d);
  p.wo = identity_linear(d);
  return p;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : 1e300;
}

}  // namespace react::testing
