// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/optim.hpp"

#include <cmath>

#include "react/errors.hpp"

namespace react {

std::size_t ScheduleConfig::warmup_steps() const {
  return static_cast<std::size_t>(std::llround(warmup_epochs * static_cast<double>(steps_per_epoch)));
}

double lr_at(std::size_t step, const ScheduleConfig& cfg) {
  const std::size_t warm = cfg.warmup_steps(), total = cfg.total_steps();
  if (step > total) throw ContractError("lr_at: step " + std::to_string(step) + " past the end of the schedule");
  if (step < warm) return cfg.peak_lr * (static_cast<double>(step) / static_cast<double>(warm));
  if (total == warm) return cfg.peak_lr;
  const double progress = static_cast<double>(step - warm) / static_cast<double>(total - warm);
  return cfg.peak_lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

double wd_at(std::size_t step, const ScheduleConfig& cfg) {
  const std::size_t total = cfg.total_steps();
  if (total == 0) return cfg.wd_start;
  const double progress = static_cast<double>(std::min(step, total)) / static_cast<double>(total);
  const double w = 0.5 * (1.0 - std::cos(M_PI * progress));
  return cfg.wd_start * (1.0 - w) + cfg.wd_end * w;
}

OptimizerState OptimizerState::adam() { return OptimizerState{}; }

OptimizerState OptimizerState::sgd(double momentum) {
  OptimizerState s;
  s.kind = OptimizerKind::sgd_momentum;
  s.momentum = momentum;
  return s;
}

bool decays(const std::string& name) {
  auto ends = [&](const std::string& suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends(".weight") || ends(".kernel");
}

namespace {

void ensure_slots(const ParameterSet& params, std::vector<std::vector<double>>& slots) {
  const auto& items = params.items();
  if (slots.empty())
    for (const auto& [_, t] : items) slots.emplace_back(t.numel(), 0.0);
  if (slots.size() != items.size()) throw StateError("optimizer state does not match the parameter set");
  for (std::size_t i = 0; i < items.size(); ++i)
    if (slots[i].size() != items[i].second.numel())
      throw StateError("optimizer state shape mismatch for " + items[i].first);
}

bool finite_grads(const ParameterSet& params, std::string* diagnostic) {
  for (const auto& [name, t] : params.items()) {
    if (!t.has_grad()) continue;
    for (double g : t.grad())
      if (!std::isfinite(g)) {
        if (diagnostic) *diagnostic = "non-finite gradient in " + name + "; step skipped";
        return false;
      }
  }
  return true;
}

}  // namespace

bool adam_step(ParameterSet& params, OptimizerState& state, double lr, double weight_decay, std::string* diagnostic) {
  if (state.kind != OptimizerKind::adam) throw StateError("adam_step on a non-Adam optimizer state");
  if (lr < 0) throw ContractError("learning rate must be >= 0");
  ensure_slots(params, state.first);
  ensure_slots(params, state.second);
  if (!finite_grads(params, diagnostic)) return false;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t), c2 = 1.0 - std::pow(state.beta2, t);
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor p = items[i].second;
    auto values = p.mutable_data();
    const bool has = p.has_grad();
    const auto g = has ? p.grad() : std::span<const double>();
    const double decay = decays(items[i].first) ? lr * weight_decay : 0.0;
    auto& m = state.first[i];
    auto& v = state.second[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double gk = has ? g[k] : 0.0;
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * gk;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * gk * gk;
      const double mhat = m[k] / c1, vhat = v[k] / c2;
      values[k] -= decay * values[k] + lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
  return true;
}

bool sgd_step(ParameterSet& params, OptimizerState& state, double lr, std::string* diagnostic) {
  if (state.kind != OptimizerKind::sgd_momentum) throw StateError("sgd_step on a non-SGD optimizer state");
  if (lr < 0) throw ContractError("learning rate must be >= 0");
  ensure_slots(params, state.first);
  if (!finite_grads(params, diagnostic)) return false;
  ++state.step;
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor p = items[i].second;
    if (!p.has_grad()) continue;
    auto values = p.mutable_data();
    const auto g = p.grad();
    auto& vel = state.first[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      vel[k] = state.momentum * vel[k] + g[k];
      values[k] -= lr * vel[k];
    }
  }
  return true;
}

double global_grad_norm(const ParameterSet& params) {
  double s = 0.0;
  for (const auto& [_, t] : params.items())
    if (t.has_grad())
      for (double g : t.grad()) s += g * g;
  return std::sqrt(s);
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0 && norm > max_norm && std::isfinite(norm)) {
    const double scale = max_norm / norm;
    for (const auto& [_, t] : params.items()) {
      if (!t.has_grad()) continue;
      Tensor h = t;
      for (double& g : h.mutable_grad()) g *= scale;
    }
  }
  return norm;
}

}  // namespace react
