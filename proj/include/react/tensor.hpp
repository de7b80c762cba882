// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace react {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Backward rule: receives the output gradient and one slot per input. A slot is
/// empty when that input needs no gradient; otherwise the rule adds into it.
using BackwardFn = std::function<void(std::span<const double> grad_out,
                                      std::span<std::span<double>> grad_in)>;

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // leaves only, allocated on first accumulation
  bool requires_grad = false;
  bool leaf = true;
};

/// Shared handle to an immutable dense row-major array of doubles.
///
/// Copies alias the same storage. Values produced by ops never change after
/// creation; only leaves (parameters, inputs) may be rewritten, and only while
/// no tape that references them is pending backward.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Writable view for leaves (optimizer updates, finite differences).
  std::span<double> mutable_data();
  std::vector<double> to_vector() const;
  double item() const;
  double operator[](std::size_t flat) const { return data()[flat]; }

  bool requires_grad() const;
  /// Marks a leaf as trainable. Rejected on op results.
  Tensor& set_requires_grad(bool value = true);
  bool is_leaf() const;

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  /// Same values, cut off from the tape.
  Tensor detach() const;
  /// Deep copy as a fresh leaf.
  Tensor clone() const;

  const std::shared_ptr<TensorImpl>& impl() const { return impl_; }
  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  friend class Tape;
  friend Tensor make_op_result(Shape, std::vector<double>, std::vector<Tensor>, BackwardFn);

  std::shared_ptr<TensorImpl> impl_;
};

/// Creates an op output and records it on the active tape when any input
/// requires a gradient.
Tensor make_op_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                      BackwardFn backward);

/// Ordered record of differentiable ops for one logical thread.
///
/// Constructing a Tape makes it the active recorder for the current thread
/// until it is destroyed; tapes nest. backward() may run once per recording.
class Tape {
 public:
  struct Entry {
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Accumulates d(root)/d(leaf) into every requires_grad leaf.
  void backward(const Tensor& root);
  /// Forgets all recorded ops and re-arms backward.
  void reset();

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  /// Replays entries in a different order; `order` must be a permutation that
  /// keeps every producer ahead of its consumers.
  void reorder(std::span<const std::size_t> order);

  static Tape* active();

 private:
  friend Tensor make_op_result(Shape, std::vector<double>, std::vector<Tensor>, BackwardFn);
  void record(Entry entry);

  std::vector<Entry> entries_;
  bool consumed_ = false;
  Tape* previous_ = nullptr;
};

/// Suspends recording on this thread for its lifetime.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape* saved_;
};

}  // namespace react
