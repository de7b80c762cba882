// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "react/decoder.hpp"

namespace react {

/// Normalised centre/size box.
struct Box {
  double cx = 0, cy = 0, w = 0, h = 0;

  double x1() const { return cx - w / 2.0; }
  double y1() const { return cy - h / 2.0; }
  double x2() const { return cx + w / 2.0; }
  double y2() const { return cy + h / 2.0; }
  double area() const { return w * h; }
};

double iou(const Box& a, const Box& b);
/// IoU minus the share of the enclosing box not covered by the union.
double giou(const Box& a, const Box& b);

/// Elementwise gIoU of boxes [.. x 4] against gt of the same shape -> [..].
Tensor giou_tensor(const Tensor& pred, const Tensor& gt);
/// mean(1 - gIoU) over all boxes.
Tensor giou_loss(const Tensor& pred, const Tensor& gt);
/// mean |pred - gt| over all boxes and coordinates.
Tensor l1_loss(const Tensor& pred, const Tensor& gt);

struct MatchResult {
  std::vector<std::size_t> assignment;  // ground-truth index -> prediction index
  double total_cost = 0.0;
};

/// Exact minimum-cost injective assignment of M rows to N >= M columns.
/// Among optimal assignments (within 1e-9 relative) the lexicographically
/// smallest one is returned, so ties go to the lowest prediction index.
MatchResult hungarian_match(const std::vector<double>& cost, std::size_t rows, std::size_t cols);

struct LossWeights {
  double l1 = 5.0;
  double giou = 2.0;
  double group_ce = 1.0;
  double action_bce = 1.0;
  bool aux_layers = true;  // losses on every decoder layer, not just the last
};

/// Supervision for one sampled clip.
struct ClipTarget {
  Tensor boxes;                                   // [M x T x 4]
  std::vector<std::vector<std::size_t>> actions;  // per actor
  std::size_t group = 0;
  std::size_t keyframe = 0;
  bool weak = false;  // no action labels: no action cost, no action loss
};

/// cost(i, j) = l1 * |b_i - b^_j|_1 + giou * (1 - gIoU) + action * (1 - mean sigmoid of gt action logits).
std::vector<double> match_cost(const Tensor& pred_boxes, const Tensor& action_logits, const Tensor& gt_boxes,
                               const std::vector<std::vector<std::size_t>>& gt_actions, const LossWeights& w,
                               bool weak);

struct LossTerms {
  Tensor total;
  double l1 = 0, giou = 0, group_ce = 0, action_bce = 0;  // weighted sums of each family
  std::vector<MatchResult> matches;                       // per decoder layer
};

LossTerms total_objective(const DecoderOutput& out, const ClipTarget& target, const LossWeights& w);

}  // namespace react
