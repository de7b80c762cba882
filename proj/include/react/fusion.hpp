// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "react/nn.hpp"

namespace react {

struct FusionParams {
  Linear box_embed;  // 4 -> d
  LayerNormParams text_norm;
  Conv1dParams refine;  // across the actor axis
  Tensor ref_offsets;   // [N x 4], logit space

  static FusionParams init(ParamInit& init, std::size_t num_queries, std::size_t d, std::size_t kernel = 3);
  std::size_t num_queries() const { return ref_offsets.dim(0); }
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// Sinusoidal encoding of (cx, cy, w, h): d/4 channels per coordinate,
/// channel j is sin (even j) or cos (odd j) of 2*pi*x / 10000^(2*(j/2) / (d/4)).
Tensor box_coordinate_encoding(const Tensor& boxes, std::size_t d);

/// boxes [N x 4] and text rows [L x d] -> fused actor features [N x d].
/// Gradients flow into both arguments; callers detach boxes fed back from
/// earlier predictions.
Tensor fuse(const Tensor& boxes, const Tensor& text, const FusionParams& p);

/// Learnable starting boxes [N x 4]: (0.5, 0.5, 0.1, 0.1) shifted in logit
/// space by the per-query offsets.
Tensor reference_boxes(const FusionParams& p);

/// Rejects boxes outside [0, 1] or with non-positive extent.
void check_boxes(const Tensor& boxes, const char* what);

}  // namespace react
