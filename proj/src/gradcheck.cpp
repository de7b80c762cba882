// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "react/errors.hpp"

namespace react {

namespace {

double eval_scalar(const std::function<Tensor()>& f) {
  Tensor y = f();
  if (y.numel() != 1) throw ContractError("grad_check needs a scalar function, got " + shape_str(y.shape()));
  return y.item();
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor()>& f, std::vector<Tensor> inputs, double eps) {
  if (eps < 1e-7 || eps > 1e-3) throw ContractError("grad_check step must lie in [1e-7, 1e-3]");
  for (Tensor& t : inputs) {
    if (!t.is_leaf()) throw ContractError("grad_check inputs must be leaves");
    t.set_requires_grad(true);
    t.zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor y = f();
    if (y.numel() != 1) throw ContractError("grad_check needs a scalar function, got " + shape_str(y.shape()));
    tape.backward(y);
  }
  for (Tensor& t : inputs) {
    if (t.has_grad()) {
      auto g = t.grad();
      analytic.emplace_back(g.begin(), g.end());
    } else {
      analytic.emplace_back(t.numel(), 0.0);
    }
    t.zero_grad();
  }

  NoGradScope no_grad;
  GradCheckReport report;
  const double f0 = eval_scalar(f);
  // One-sided slopes of a smooth function differ by about f''·eps.
  const double kink_tol = 100.0 * eps;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto x = inputs[ti].mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + eps;
      const double fp = eval_scalar(f);
      x[i] = saved - eps;
      const double fm = eval_scalar(f);
      x[i] = saved;
      const double fwd = (fp - f0) / eps;
      const double bwd = (f0 - fm) / eps;
      if (std::fabs(fwd - bwd) > kink_tol * std::max({1.0, std::fabs(fwd), std::fabs(bwd)})) {
        ++report.excluded;
        continue;
      }
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[ti][i];
      const double err = std::fabs(a - numeric) / std::max({1.0, std::fabs(a), std::fabs(numeric)});
      report.max_rel_error = std::max(report.max_rel_error, err);
      ++report.compared;
    }
  }
  return report;
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, double eps) {
  return grad_check([&f, &x] { return f(x); }, {x}, eps);
}

}  // namespace react
