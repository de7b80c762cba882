// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "react/encoder.hpp"
#include "react/fusion.hpp"

namespace react {

/// d -> d -> d -> 4 perceptron; the last layer starts at zero so the first
/// refinement leaves boxes where they were.
struct BoxHeadParams {
  Linear fc1, fc2, out;

  static BoxHeadParams init(ParamInit& init, std::size_t d);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

Tensor box_head(const Tensor& x, const BoxHeadParams& p);

/// clamp(sigmoid(logit(previous) + offsets)). Fed-back boxes are detached;
/// the learnable reference boxes are not, so their offsets receive gradients.
Tensor refine_boxes(const Tensor& previous, const Tensor& offsets, bool detach = true);

struct DecoderLayerParams {
  LayerNormParams self_norm;
  AttentionParams self_attn;
  LayerNormParams spatial_norm;
  AttentionParams spatial_attn;
  LayerNormParams temporal_norm;
  AttentionParams temporal_attn;
  LayerNormParams ffn_norm;
  FeedForwardParams ffn;
  LayerNormParams box_norm;
  BoxHeadParams box;

  static DecoderLayerParams init(ParamInit& init, std::size_t d, std::size_t heads, std::size_t d_ff, double dropout);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

struct DecoderParams {
  std::vector<DecoderLayerParams> layers;
  FusionParams fusion;
  bool use_fusion = true;
  bool teacher_forcing = false;
  /// Stop gradients through boxes fed back between layers. Finite-difference
  /// checks turn this off to compare against the full derivative.
  bool detach_feedback = true;
  Tensor query_embed;  // [N x d], used when fusion is off
  PositionalEncoding temporal;
  Linear gt_box_embed;       // teacher forcing memory rows
  LayerNormParams direct_norm;
  BoxHeadParams direct_box;  // boxes straight from the fused features when there are no layers
  LayerNormParams out_norm;
  Linear action_head;  // d -> A
  Linear group_head;   // d -> G

  static DecoderParams init(ParamInit& init, std::size_t num_layers, std::size_t num_queries, std::size_t d,
                            std::size_t heads, std::size_t d_ff, std::size_t max_frames, std::size_t num_actions,
                            std::size_t num_groups, double dropout);
  std::size_t num_queries() const { return fusion.num_queries(); }
  void collect(ParameterSet& set, const std::string& prefix) const;
};

struct DecoderOutput {
  std::vector<Tensor> boxes;       // per layer [N x T x 4]
  std::vector<Tensor> embeddings;  // per layer [N x d]
  Tensor action_logits;            // [N x A]
  Tensor group_logits;             // [G]
  Tensor group_embedding;          // [1 x d], final group-token row
  Tensor reference;                // [N x 4]
};

/// Runs the decoder stack. gt_boxes [M x 4] (keyframe) are attended to only
/// when teacher forcing is on and ctx.training is set.
DecoderOutput decode(const SharedRepresentation& vt, const DecoderParams& p, const RunContext& ctx = {},
                     const Tensor* gt_boxes = nullptr);

Tensor classify_group(const Tensor& group_row, const DecoderParams& p);
Tensor classify_actions(const Tensor& actor_rows, const DecoderParams& p);

/// Index of the annotated frame within a sampled clip of T frames.
inline std::size_t keyframe_of(std::size_t frames) { return frames / 2; }

/// [N x T x 4] -> [N x 4] at frame t.
Tensor frame_slice(const Tensor& tube, std::size_t t);

}  // namespace react
