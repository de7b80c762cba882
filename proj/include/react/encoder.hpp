// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "react/nn.hpp"

namespace react {

/// Row ranges of the shared representation: video rows (frame-major), text
/// rows, then the single group-token row.
struct RowLayout {
  std::size_t frames = 0, cells = 0, text = 0;

  std::size_t video_rows() const { return frames * cells; }
  std::size_t text_begin() const { return video_rows(); }
  std::size_t group_row() const { return video_rows() + text; }
  std::size_t total() const { return group_row() + 1; }
};

struct SharedRepresentation {
  Tensor rows;  // [(T*HW + L + 1) x d]
  RowLayout layout;

  Tensor video() const;  // [T x HW x d]
  Tensor text() const;   // [L x d]
  Tensor group() const;  // [1 x d]
};

struct CrossModalParams {
  LayerNormParams v2t_query, v2t_key;
  AttentionParams v2t;
  LayerNormParams t2v_query, t2v_key;
  AttentionParams t2v;

  static CrossModalParams init(ParamInit& init, std::size_t d, std::size_t heads, double dropout);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

struct EncoderLayerParams {
  LayerNormParams text_norm;
  AttentionParams text_self;
  LayerNormParams temporal_norm;
  AttentionParams temporal_self;
  LayerNormParams group_norm;
  AttentionParams group_attn;  // group token over video rows
  LayerNormParams fast_norm;
  Conv1dParams fast;  // over per-frame pooled rows
  CrossModalParams cross;
  LayerNormParams ffn_norm;
  FeedForwardParams ffn;

  static EncoderLayerParams init(ParamInit& init, std::size_t d, std::size_t heads, std::size_t d_ff, double dropout);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

struct EncoderParams {
  std::vector<EncoderLayerParams> layers;
  Tensor group_token;  // [1 x d]
  PositionalEncoding temporal;
  LayerNormParams final_norm;
  bool temporal_encoding = true;
  bool fast_branch = true;

  static EncoderParams init(ParamInit& init, std::size_t num_layers, std::size_t d, std::size_t heads,
                            std::size_t d_ff, std::size_t max_frames, double dropout);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// V2T then T2V, each pre-norm with a residual. video_rows may include the
/// group token as a trailing row.
std::pair<Tensor, Tensor> cross_modal_block(const Tensor& video_rows, const Tensor& text_rows,
                                            const CrossModalParams& p, const RunContext& ctx = {});

/// v_f [T x HW x d], t_f [L x d] -> shared representation. With no layers the
/// result is the plain concatenation of the inputs and the initial group token.
SharedRepresentation encode(const Tensor& v_f, const Tensor& t_f, const EncoderParams& p, const RunContext& ctx = {});

}  // namespace react
