// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/nn.hpp"

#include <cmath>
#include <numeric>

#include "react/errors.hpp"

namespace react {

Tensor ParamInit::xavier(std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> v(fan_in * fan_out);
  for (double& x : v) x = u(rng_);
  return Tensor::from({fan_in, fan_out}, std::move(v), true);
}

Tensor ParamInit::normal(Shape shape, double stddev) {
  std::normal_distribution<double> n(0.0, stddev);
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = n(rng_);
  return Tensor::from(std::move(shape), std::move(v), true);
}

Tensor ParamInit::zeros(Shape shape) { return Tensor::zeros(std::move(shape), true); }

Tensor ParamInit::ones(Shape shape) { return Tensor::full(std::move(shape), 1.0, true); }

void ParameterSet::add(const std::string& name, const Tensor& t) {
  for (const auto& [n, _] : items_)
    if (n == name) throw ConfigError("duplicate parameter name '" + name + "'");
  items_.emplace_back(name, t);
}

const Tensor& ParameterSet::find(const std::string& name) const {
  for (const auto& [n, t] : items_)
    if (n == name) return t;
  throw ConfigError("no parameter named '" + name + "'");
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : items_) n += t.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : items_) t.zero_grad();
}

Tensor RunContext::drop(const Tensor& x, double p) const {
  if (!training || p == 0.0) return x;
  if (!rng) throw StateError("training-mode dropout needs an RNG");
  return dropout(x, p, *rng);
}

Linear Linear::init(ParamInit& init, std::size_t in, std::size_t out, bool zero) {
  return {zero ? init.zeros({in, out}) : init.xavier(in, out), init.zeros({out})};
}

void Linear::collect(ParameterSet& set, const std::string& prefix) const {
  set.add(prefix + ".weight", weight);
  set.add(prefix + ".bias", bias);
}

Tensor linear(const Tensor& x, const Linear& p) {
  if (x.shape().back() != p.weight.dim(0))
    throw DimensionError("linear input " + shape_str(x.shape()) + " does not match weight " + shape_str(p.weight.shape()));
  return add(matmul(x, p.weight), p.bias);
}

LayerNormParams LayerNormParams::init(ParamInit& init, std::size_t d) { return {init.ones({d}), init.zeros({d})}; }

void LayerNormParams::collect(ParameterSet& set, const std::string& prefix) const {
  set.add(prefix + ".gamma", gamma);
  set.add(prefix + ".beta", beta);
}

Tensor layer_norm(const Tensor& x, const LayerNormParams& p) { return layer_norm(x, p.gamma, p.beta, 1e-5); }

FeedForwardParams FeedForwardParams::init(ParamInit& init, std::size_t d, std::size_t d_ff, Activation act) {
  if (d_ff < d) throw ConfigError("feed-forward width must be at least the model width");
  return {Linear::init(init, d, d_ff), Linear::init(init, d_ff, d), act};
}

void FeedForwardParams::collect(ParameterSet& set, const std::string& prefix) const {
  fc1.collect(set, prefix + ".fc1");
  fc2.collect(set, prefix + ".fc2");
}

Tensor feed_forward(const Tensor& x, const FeedForwardParams& p) {
  if (x.shape().back() != p.fc1.weight.dim(0))
    throw DimensionError("feed_forward input " + shape_str(x.shape()) + " does not match width " +
                         std::to_string(p.fc1.weight.dim(0)));
  Tensor h = linear(x, p.fc1);
  h = p.activation == Activation::relu ? relu(h) : gelu(h);
  return linear(h, p.fc2);
}

AttentionParams AttentionParams::init(ParamInit& init, std::size_t d_model, std::size_t num_heads, double dropout) {
  if (num_heads == 0 || d_model % num_heads != 0)
    throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " + std::to_string(num_heads) + " heads");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
  AttentionParams p;
  p.num_heads = num_heads;
  p.d_model = d_model;
  p.wq = Linear::init(init, d_model, d_model);
  p.wk = Linear::init(init, d_model, d_model);
  p.wv = Linear::init(init, d_model, d_model);
  p.wo = Linear::init(init, d_model, d_model);
  p.dropout_rate = dropout;
  return p;
}

void AttentionParams::collect(ParameterSet& set, const std::string& prefix) const {
  wq.collect(set, prefix + ".wq");
  wk.collect(set, prefix + ".wk");
  wv.collect(set, prefix + ".wv");
  wo.collect(set, prefix + ".wo");
}

namespace {

void check_width(const Tensor& t, std::size_t d, const char* what) {
  if (t.shape().back() != d)
    throw DimensionError(std::string(what) + " " + shape_str(t.shape()) + " does not have width " + std::to_string(d));
}

}  // namespace

Tensor multi_head_attention(const Tensor& q_seq, const Tensor& kv_seq, const AttentionParams& p,
                            const AttentionMask* mask) {
  check_width(q_seq, p.d_model, "attention query");
  check_width(kv_seq, p.d_model, "attention key/value");
  Tensor q = linear(q_seq, p.wq);
  Tensor k = linear(kv_seq, p.wk);
  Tensor v = linear(kv_seq, p.wv);
  return linear(scaled_dot_attention(q, k, v, p.num_heads, mask), p.wo);
}

std::vector<double> attention_weights(const Tensor& q_seq, const Tensor& kv_seq, const AttentionParams& p,
                                      const AttentionMask* mask) {
  NoGradScope no_grad;
  return attention_probabilities(linear(q_seq, p.wq), linear(kv_seq, p.wk), p.num_heads, mask);
}

Conv1dParams Conv1dParams::init(ParamInit& init, std::size_t k, std::size_t c_in, std::size_t c_out) {
  if (k % 2 == 0) throw ConfigError("conv1d kernel size must be odd, got " + std::to_string(k));
  const double bound = 1.0 / std::sqrt(static_cast<double>(k * c_in));
  std::uniform_real_distribution<double> u(-bound, bound);
  std::vector<double> w(k * c_in * c_out);
  for (double& x : w) x = u(init.rng());
  return {Tensor::from({k, c_in, c_out}, std::move(w), true), init.zeros({c_out})};
}

Conv1dParams Conv1dParams::identity(std::size_t channels) {
  std::vector<double> w(channels * channels, 0.0);
  for (std::size_t c = 0; c < channels; ++c) w[c * channels + c] = 1.0;
  return {Tensor::from({1, channels, channels}, std::move(w), true), Tensor::zeros({channels}, true)};
}

void Conv1dParams::collect(ParameterSet& set, const std::string& prefix) const {
  set.add(prefix + ".kernel", kernel);
  set.add(prefix + ".bias", bias);
}

Tensor conv1d(const Tensor& x, const Conv1dParams& p) { return conv1d(x, p.kernel, p.bias); }

std::vector<double> sinusoid_table(std::size_t length, std::size_t d) {
  if (d % 2 != 0) throw ConfigError("sinusoidal encodings need an even width");
  std::vector<double> t(length * d);
  for (std::size_t pos = 0; pos < length; ++pos)
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double angle = static_cast<double>(pos) / std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(d));
      t[pos * d + 2 * i] = std::sin(angle);
      t[pos * d + 2 * i + 1] = std::cos(angle);
    }
  return t;
}

PositionalEncoding PositionalEncoding::sinusoidal(std::size_t length, std::size_t d) {
  return {PositionalKind::sinusoidal_temporal, Tensor::from({length, d}, sinusoid_table(length, d))};
}

PositionalEncoding PositionalEncoding::spatial_2d(std::size_t height, std::size_t width, std::size_t d) {
  if (d % 4 != 0) throw ConfigError("2-D sinusoidal encodings need a width divisible by 4");
  const std::size_t half = d / 2;
  const auto rows = sinusoid_table(height, half);
  const auto cols = sinusoid_table(width, half);
  std::vector<double> t(height * width * d);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c) {
      double* dst = t.data() + (r * width + c) * d;
      std::copy_n(rows.data() + r * half, half, dst);
      std::copy_n(cols.data() + c * half, half, dst + half);
    }
  return {PositionalKind::sinusoidal_spatial_2d, Tensor::from({height * width, d}, std::move(t))};
}

PositionalEncoding PositionalEncoding::learned(ParamInit& init, std::size_t length, std::size_t d) {
  return {PositionalKind::learned, init.normal({length, d}, 0.02)};
}

Tensor positional_encode(const Tensor& x, const PositionalEncoding& pe, const std::vector<std::size_t>& positions) {
  if (x.rank() < 2) throw DimensionError("positional_encode expects [.. x L x d], got " + shape_str(x.shape()));
  const std::size_t len = x.dim(x.rank() - 2);
  if (positions.size() != len)
    throw DimensionError("positional_encode: " + std::to_string(positions.size()) + " positions for " +
                         std::to_string(len) + " rows");
  if (pe.table.dim(1) != x.shape().back())
    throw DimensionError("positional table width " + std::to_string(pe.table.dim(1)) + " does not match input " +
                         shape_str(x.shape()));
  for (std::size_t p : positions)
    if (p >= pe.table.dim(0))
      throw ConfigError("position " + std::to_string(p) + " exceeds the positional table (" +
                        std::to_string(pe.table.dim(0)) + " rows)");
  return add(x, index_select(pe.table, positions));
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace react
