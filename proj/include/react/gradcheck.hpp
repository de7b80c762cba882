// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "react/tensor.hpp"

namespace react {

struct GradCheckReport {
  /// max over compared coordinates of |analytic - numeric| / max(1, |analytic|, |numeric|)
  double max_rel_error = 0.0;
  std::size_t compared = 0;
  /// Coordinates where the one-sided differences disagree (kinks); not compared.
  std::size_t excluded = 0;
};

/// Compares the tape gradient of scalar `f` with central differences.
///
/// `inputs` must be leaves that `f` reads; they are perturbed in place and
/// restored. Their gradients are cleared on return.
GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs, double eps = 1e-5);

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps = 1e-5);

}  // namespace react
