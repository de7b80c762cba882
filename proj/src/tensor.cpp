// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "react/errors.hpp"

namespace react {

namespace {

thread_local Tape* g_active_tape = nullptr;

const TensorImpl& checked(const std::shared_ptr<TensorImpl>& impl) {
  if (!impl) throw StateError("use of an undefined tensor");
  return *impl;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t d : shape)
    if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
  if (shape_numel(shape) != values.size())
    throw DimensionError("shape " + shape_str(shape) + " does not hold " + std::to_string(values.size()) +
                         " values");
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const { return checked(impl_).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return checked(impl_).data.size(); }

std::span<const double> Tensor::data() const { return checked(impl_).data; }

std::span<double> Tensor::mutable_data() {
  checked(impl_);
  if (!impl_->leaf) throw StateError("op results are immutable");
  return impl_->data;
}

std::vector<double> Tensor::to_vector() const { return checked(impl_).data; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return checked(impl_).requires_grad; }

Tensor& Tensor::set_requires_grad(bool value) {
  checked(impl_);
  if (!impl_->leaf) throw StateError("requires_grad can only be set on leaves");
  impl_->requires_grad = value;
  return *this;
}

bool Tensor::is_leaf() const { return checked(impl_).leaf; }

bool Tensor::has_grad() const { return !checked(impl_).grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw StateError("tensor has no gradient");
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
  checked(impl_);
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() {
  checked(impl_);
  impl_->grad.clear();
}

Tensor Tensor::detach() const { return from(shape(), to_vector(), false); }

Tensor Tensor::clone() const { return from(shape(), to_vector(), requires_grad() && is_leaf()); }

Tensor make_op_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs, BackwardFn backward) {
  Tensor out = Tensor::from(std::move(shape), std::move(values), false);
  Tape* tape = g_active_tape;
  if (!tape) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (!any) return out;
  out.impl_->requires_grad = true;
  out.impl_->leaf = false;
  tape->record(Tape::Entry{std::move(inputs), out, std::move(backward)});
  return out;
}

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() {
  if (g_active_tape == this) g_active_tape = previous_;
}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(Entry entry) { entries_.push_back(std::move(entry)); }

void Tape::reset() {
  entries_.clear();
  consumed_ = false;
}

void Tape::backward(const Tensor& root) {
  if (consumed_) throw StateError("backward already ran on this tape; call reset() first");
  if (root.numel() != 1)
    throw ContractError("backward root must be a scalar, got " + shape_str(root.shape()));
  if (!root.requires_grad() || root.is_leaf())
    throw ContractError("backward root was not produced through the tape");
  consumed_ = true;

  std::unordered_map<const TensorImpl*, std::vector<double>> grads;
  grads[root.impl().get()] = {1.0};
  std::vector<std::span<double>> slots;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    auto found = grads.find(it->output.impl().get());
    if (found == grads.end()) continue;
    std::vector<double> grad_out = std::move(found->second);
    grads.erase(found);
    slots.assign(it->inputs.size(), {});
    for (std::size_t i = 0; i < it->inputs.size(); ++i) {
      const Tensor& in = it->inputs[i];
      if (!in.requires_grad()) continue;
      TensorImpl& impl = *in.impl();
      if (impl.leaf) {
        if (impl.grad.empty()) impl.grad.assign(impl.data.size(), 0.0);
        slots[i] = impl.grad;
      } else {
        auto& buf = grads[&impl];
        if (buf.empty()) buf.assign(impl.data.size(), 0.0);
        slots[i] = buf;
      }
    }
    it->backward(grad_out, slots);
  }
}

void Tape::reorder(std::span<const std::size_t> order) {
  if (order.size() != entries_.size()) throw ContractError("reorder needs one index per tape entry");
  std::vector<bool> seen(entries_.size(), false);
  std::unordered_map<const TensorImpl*, std::size_t> producer_pos;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    if (order[pos] >= entries_.size() || seen[order[pos]]) throw ContractError("reorder: not a permutation");
    seen[order[pos]] = true;
    producer_pos[entries_[order[pos]].output.impl().get()] = pos;
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    for (const Tensor& in : entries_[order[pos]].inputs) {
      auto p = producer_pos.find(in.impl().get());
      if (p != producer_pos.end() && p->second >= pos)
        throw ContractError("reorder: order is not topological");
    }
  }
  std::vector<Entry> next;
  next.reserve(entries_.size());
  for (std::size_t idx : order) next.push_back(std::move(entries_[idx]));
  entries_ = std::move(next);
}

NoGradScope::NoGradScope() : saved_(g_active_tape) { g_active_tape = nullptr; }

NoGradScope::~NoGradScope() { g_active_tape = saved_; }

}  // namespace react
