// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "react/nn.hpp"

namespace react {

struct ScheduleConfig {
  double peak_lr = 5e-4;
  double warmup_epochs = 5;
  std::size_t total_epochs = 30;
  std::size_t steps_per_epoch = 1;
  double wd_start = 0.04;
  double wd_end = 0.1;

  std::size_t warmup_steps() const;
  std::size_t total_steps() const { return total_epochs * steps_per_epoch; }
};

/// Linear 0 -> peak over the warm-up steps, then cosine peak -> 0.
double lr_at(std::size_t step, const ScheduleConfig& cfg);
/// Cosine interpolation wd_start -> wd_end over all steps.
double wd_at(std::size_t step, const ScheduleConfig& cfg);

enum class OptimizerKind { adam, sgd_momentum };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // adam
  double momentum = 0.9;                          // sgd
  std::size_t step = 0;
  std::vector<std::vector<double>> first;   // adam m, or sgd velocity
  std::vector<std::vector<double>> second;  // adam v

  static OptimizerState adam();
  static OptimizerState sgd(double momentum = 0.9);
};

/// Matrix weights get weight decay; biases, norms, tokens and offsets do not.
bool decays(const std::string& name);

/// Bias-corrected Adam with decoupled weight decay (p -= lr * wd * p).
/// A non-finite gradient leaves parameters and state untouched and returns
/// false with a diagnostic naming the parameter.
bool adam_step(ParameterSet& params, OptimizerState& state, double lr, double weight_decay,
               std::string* diagnostic = nullptr);

/// v = momentum * v + g; p -= lr * v. Same NaN contract as adam_step.
bool sgd_step(ParameterSet& params, OptimizerState& state, double lr, std::string* diagnostic = nullptr);

double global_grad_norm(const ParameterSet& params);
/// Rescales all gradients so the global norm is at most max_norm. Returns the norm before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace react
