// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "react/ops.hpp"
#include "react/tensor.hpp"

namespace react {

/// Seeded source of initial parameter values.
class ParamInit {
 public:
  explicit ParamInit(std::uint64_t seed) : rng_(seed) {}

  /// Xavier-uniform [fan_in x fan_out] trainable leaf.
  Tensor xavier(std::size_t fan_in, std::size_t fan_out);
  Tensor normal(Shape shape, double stddev);
  Tensor zeros(Shape shape);
  Tensor ones(Shape shape);
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Ordered, named handles to trainable leaves. Handles alias the parameter
/// storage, so updates through the set are visible to the owning blocks.
class ParameterSet {
 public:
  void add(const std::string& name, const Tensor& t);
  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  const Tensor& find(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

/// Dropout switch threaded through forward passes. Inference by default.
struct RunContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;

  Tensor drop(const Tensor& x, double p) const;
};

struct Linear {
  Tensor weight;  // [in x out]
  Tensor bias;    // [out]

  static Linear init(ParamInit& init, std::size_t in, std::size_t out, bool zero = false);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

Tensor linear(const Tensor& x, const Linear& p);

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;

  static LayerNormParams init(ParamInit& init, std::size_t d);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// eps = 1e-5 over the last axis.
Tensor layer_norm(const Tensor& x, const LayerNormParams& p);

enum class Activation { relu, gelu };

struct FeedForwardParams {
  Linear fc1;  // d -> d_ff
  Linear fc2;  // d_ff -> d
  Activation activation = Activation::gelu;

  static FeedForwardParams init(ParamInit& init, std::size_t d, std::size_t d_ff, Activation act = Activation::gelu);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// fc2(act(fc1(x))) applied row-wise.
Tensor feed_forward(const Tensor& x, const FeedForwardParams& p);

struct AttentionParams {
  std::size_t num_heads = 1;
  std::size_t d_model = 0;
  Linear wq, wk, wv, wo;
  double dropout_rate = 0.0;

  static AttentionParams init(ParamInit& init, std::size_t d_model, std::size_t num_heads, double dropout = 0.0);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// Multi-head attention of q_seq [.. x Lq x d] over kv_seq [.. x Lk x d]:
/// project, attend per head with scale 1/sqrt(d/heads), concatenate heads and
/// apply the output projection.
Tensor multi_head_attention(const Tensor& q_seq, const Tensor& kv_seq, const AttentionParams& p,
                            const AttentionMask* mask = nullptr);

/// Attention weights [B x heads x Lq x Lk] that multi_head_attention would use.
std::vector<double> attention_weights(const Tensor& q_seq, const Tensor& kv_seq, const AttentionParams& p,
                                      const AttentionMask* mask = nullptr);

struct Conv1dParams {
  Tensor kernel;  // [k x c_in x c_out]
  Tensor bias;    // [c_out]

  static Conv1dParams init(ParamInit& init, std::size_t k, std::size_t c_in, std::size_t c_out);
  /// k = 1 kernel that copies its input.
  static Conv1dParams identity(std::size_t channels);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

Tensor conv1d(const Tensor& x, const Conv1dParams& p);

enum class PositionalKind { sinusoidal_temporal, sinusoidal_spatial_2d, learned };

struct PositionalEncoding {
  PositionalKind kind = PositionalKind::sinusoidal_temporal;
  Tensor table;  // [rows x d]

  /// Standard 1-D table: even channels sin(pos / 10000^(2i/d)), odd channels cos.
  static PositionalEncoding sinusoidal(std::size_t length, std::size_t d);
  /// Grid positions r * width + c; first half of the channels encodes r, second half c.
  static PositionalEncoding spatial_2d(std::size_t height, std::size_t width, std::size_t d);
  static PositionalEncoding learned(ParamInit& init, std::size_t length, std::size_t d);
};

/// Raw sinusoid table values [length x d] (d even).
std::vector<double> sinusoid_table(std::size_t length, std::size_t d);

/// x [.. x L x d] plus table rows at `positions` (one per row of the L axis).
Tensor positional_encode(const Tensor& x, const PositionalEncoding& pe, const std::vector<std::size_t>& positions);

/// 0, 1, ..., n-1
std::vector<std::size_t> iota(std::size_t n);

}  // namespace react
