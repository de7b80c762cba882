// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "react/tensor.hpp"

// Differentiable operators. Every function here records a backward rule on the
// active tape whenever one of its inputs requires a gradient.
namespace react {

// ---- linear algebra -------------------------------------------------------

/// a [... x k] times b [k x n] -> [... x n]; leading axes of `a` are flattened.
Tensor matmul(const Tensor& a, const Tensor& b);

// ---- elementwise (numpy-style broadcasting) -------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);

/// scale * x + shift
Tensor affine(const Tensor& x, double scale, double shift);

Tensor neg(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sin(const Tensor& x);
Tensor cos(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor clamp(const Tensor& x, double lo, double hi);
/// log(x / (1 - x)) with x clamped to [eps, 1 - eps].
Tensor inverse_sigmoid(const Tensor& x, double eps = 1e-5);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return affine(a, 1.0, c); }
inline Tensor operator-(const Tensor& a, double c) { return affine(a, 1.0, -c); }
inline Tensor operator-(double c, const Tensor& a) { return affine(a, -1.0, c); }
inline Tensor operator*(const Tensor& a, double c) { return affine(a, c, 0.0); }
inline Tensor operator*(double c, const Tensor& a) { return affine(a, c, 0.0); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

// ---- reductions -----------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_axis(const Tensor& x, std::size_t axis);
Tensor mean_axis(const Tensor& x, std::size_t axis);

// ---- normalizers ------------------------------------------------------------

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);
/// Normalizes the last axis to zero mean and unit variance, then applies
/// gamma/beta (both shaped [d]).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// ---- shape ------------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
/// Half-open range [begin, end) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Gathers entries of axis 0.
Tensor index_select(const Tensor& x, const std::vector<std::size_t>& indices);
/// Stacks `count` copies of x along a new leading axis.
Tensor tile_leading(const Tensor& x, std::size_t count);

// ---- neural primitives ------------------------------------------------------

/// Keys a query may attend to; row-major [Lq x Lk], nonzero = allowed.
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;
};

/// Scaled dot-product attention over already-projected q [B x Lq x d],
/// k/v [B x Lk x d] (rank-2 inputs mean B = 1). Heads split the last axis;
/// scores are scaled by 1/sqrt(d / heads).
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                            const AttentionMask* mask = nullptr);

/// Attention probabilities [B x heads x Lq x Lk] for inspection; not recorded.
std::vector<double> attention_probabilities(const Tensor& q, const Tensor& k, std::size_t heads,
                                            const AttentionMask* mask = nullptr);

/// Cross-correlation of x [L x c_in] with kernel [k x c_in x c_out] along the
/// sequence axis with zero "same" padding; bias [c_out] may be undefined.
Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias);

/// Inverted dropout; identity when p == 0.
Tensor dropout(const Tensor& x, double p, std::mt19937_64& rng);

// ---- losses -----------------------------------------------------------------

/// Mean softmax cross-entropy of logits [B x C] (or [C]) against class indices.
Tensor cross_entropy(const Tensor& logits, const std::vector<std::size_t>& targets);
/// Mean binary cross-entropy on logits against {0,1} targets of the same shape.
Tensor bce_with_logits(const Tensor& logits, const std::vector<double>& targets);

}  // namespace react
