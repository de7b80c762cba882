// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "react/errors.hpp"

namespace react {

namespace {

void check_box(const Box& b) {
  if (!(b.w > 0.0 && b.h > 0.0)) throw ContractError("gIoU of a degenerate box");
}

double overlap(double a1, double a2, double b1, double b2) { return std::max(0.0, std::min(a2, b2) - std::max(a1, b1)); }

}  // namespace

double iou(const Box& a, const Box& b) {
  check_box(a);
  check_box(b);
  const double inter = overlap(a.x1(), a.x2(), b.x1(), b.x2()) * overlap(a.y1(), a.y2(), b.y1(), b.y2());
  return inter / (a.area() + b.area() - inter);
}

double giou(const Box& a, const Box& b) {
  check_box(a);
  check_box(b);
  const double inter = overlap(a.x1(), a.x2(), b.x1(), b.x2()) * overlap(a.y1(), a.y2(), b.y1(), b.y2());
  const double uni = a.area() + b.area() - inter;
  const double hull = (std::max(a.x2(), b.x2()) - std::min(a.x1(), b.x1())) *
                      (std::max(a.y2(), b.y2()) - std::min(a.y1(), b.y1()));
  return inter / uni - (hull - uni) / hull;
}

Tensor giou_tensor(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape() || pred.shape().back() != 4)
    throw DimensionError("gIoU needs matching [.. x 4] boxes, got " + shape_str(pred.shape()) + " and " +
                         shape_str(gt.shape()));
  for (const Tensor* t : {&pred, &gt}) {
    const auto v = t->data();
    for (std::size_t i = 0; i < v.size(); i += 4)
      if (!(v[i + 2] > 0.0 && v[i + 3] > 0.0)) throw ContractError("gIoU of a degenerate box");
  }
  const std::size_t ax = pred.rank() - 1;
  auto coord = [ax](const Tensor& t, std::size_t c) { return slice(t, ax, c, c + 1); };
  Tensor px1 = coord(pred, 0) - coord(pred, 2) * 0.5, px2 = coord(pred, 0) + coord(pred, 2) * 0.5;
  Tensor py1 = coord(pred, 1) - coord(pred, 3) * 0.5, py2 = coord(pred, 1) + coord(pred, 3) * 0.5;
  Tensor gx1 = coord(gt, 0) - coord(gt, 2) * 0.5, gx2 = coord(gt, 0) + coord(gt, 2) * 0.5;
  Tensor gy1 = coord(gt, 1) - coord(gt, 3) * 0.5, gy2 = coord(gt, 1) + coord(gt, 3) * 0.5;
  Tensor inter = relu(minimum(px2, gx2) - maximum(px1, gx1)) * relu(minimum(py2, gy2) - maximum(py1, gy1));
  Tensor uni = coord(pred, 2) * coord(pred, 3) + coord(gt, 2) * coord(gt, 3) - inter;
  Tensor hull = (maximum(px2, gx2) - minimum(px1, gx1)) * (maximum(py2, gy2) - minimum(py1, gy1));
  Tensor g = inter / uni - (hull - uni) / hull;
  Shape s = pred.shape();
  s.pop_back();
  if (s.empty()) s = {1};
  return reshape(g, s);
}

Tensor giou_loss(const Tensor& pred, const Tensor& gt) { return 1.0 - mean(giou_tensor(pred, gt)); }

Tensor l1_loss(const Tensor& pred, const Tensor& gt) {
  if (pred.shape() != gt.shape()) throw DimensionError("l1_loss shape mismatch");
  return mean(abs(pred - gt));
}

namespace {

// Potential-based O(n^2 m) assignment for rows <= cols (1-based internals).
double solve_assignment(const std::vector<double>& a, std::size_t n, std::size_t m, std::vector<std::size_t>& match) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  match.assign(n, 0);
  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) {
      match[p[j] - 1] = j - 1;
      total += a[(p[j] - 1) * m + (j - 1)];
    }
  return total;
}

}  // namespace

MatchResult hungarian_match(const std::vector<double>& cost, std::size_t rows, std::size_t cols) {
  if (rows > cols)
    throw ContractError("cannot match " + std::to_string(rows) + " ground-truth actors to " + std::to_string(cols) +
                        " predictions");
  if (cost.size() != rows * cols) throw DimensionError("cost matrix size does not match its dimensions");
  for (double c : cost)
    if (!std::isfinite(c)) throw ContractError("non-finite matching cost");
  MatchResult r;
  if (rows == 0) return r;

  std::vector<std::size_t> tmp;
  const double best = solve_assignment(cost, rows, cols, tmp);
  const double tol = 1e-9 * std::max(1.0, std::fabs(best));

  // Fix rows in order to the lowest column that still admits an optimum.
  std::vector<char> taken(cols, 0);
  double fixed = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (taken[j]) continue;
      double rest = 0.0;
      const std::size_t left = rows - i - 1;
      if (left > 0) {
        std::vector<std::size_t> free_cols;
        for (std::size_t c = 0; c < cols; ++c)
          if (!taken[c] && c != j) free_cols.push_back(c);
        std::vector<double> sub(left * free_cols.size());
        for (std::size_t a = 0; a < left; ++a)
          for (std::size_t b = 0; b < free_cols.size(); ++b) sub[a * free_cols.size() + b] = cost[(i + 1 + a) * cols + free_cols[b]];
        rest = solve_assignment(sub, left, free_cols.size(), tmp);
      }
      if (fixed + cost[i * cols + j] + rest <= best + tol) {
        taken[j] = 1;
        fixed += cost[i * cols + j];
        r.assignment.push_back(j);
        break;
      }
    }
  }
  r.total_cost = 0.0;
  for (std::size_t i = 0; i < rows; ++i) r.total_cost += cost[i * cols + r.assignment[i]];
  return r;
}

std::vector<double> match_cost(const Tensor& pred_boxes, const Tensor& action_logits, const Tensor& gt_boxes,
                               const std::vector<std::vector<std::size_t>>& gt_actions, const LossWeights& w,
                               bool weak) {
  const std::size_t n = pred_boxes.dim(0), m = gt_boxes.dim(0);
  if (pred_boxes.shape() != Shape{n, 4} || gt_boxes.shape() != Shape{m, 4})
    throw DimensionError("match_cost expects keyframe boxes [N x 4] and [M x 4]");
  if (!weak && gt_actions.size() != m) throw DimensionError("one action set per ground-truth actor is required");
  const auto pb = pred_boxes.data(), gb = gt_boxes.data(), lg = action_logits.data();
  const std::size_t a = action_logits.dim(action_logits.rank() - 1);
  std::vector<double> cost(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const Box g{gb[i * 4], gb[i * 4 + 1], gb[i * 4 + 2], gb[i * 4 + 3]};
    for (std::size_t j = 0; j < n; ++j) {
      const Box p{pb[j * 4], pb[j * 4 + 1], pb[j * 4 + 2], pb[j * 4 + 3]};
      double l1 = 0.0;
      for (std::size_t c = 0; c < 4; ++c) l1 += std::fabs(pb[j * 4 + c] - gb[i * 4 + c]);
      double c = w.l1 * l1 + w.giou * (1.0 - giou(p, g));
      if (!weak && !gt_actions[i].empty()) {
        double s = 0.0;
        for (std::size_t k : gt_actions[i]) s += 1.0 / (1.0 + std::exp(-lg[j * a + k]));
        c += w.action_bce * (1.0 - s / static_cast<double>(gt_actions[i].size()));
      }
      cost[i * n + j] = c;
    }
  }
  return cost;
}

LossTerms total_objective(const DecoderOutput& out, const ClipTarget& target, const LossWeights& w) {
  if (!target.boxes.defined() || target.boxes.rank() != 3 || target.boxes.dim(0) == 0)
    throw DataError("annotation has no actor boxes");
  if (out.boxes.empty()) throw ContractError("decoder produced no boxes");
  const std::size_t m = target.boxes.dim(0), n = out.boxes.front().dim(0), a = out.action_logits.dim(1);
  if (target.boxes.shape() != Shape{m, out.boxes.front().dim(1), 4})
    throw DimensionError("target tubes " + shape_str(target.boxes.shape()) + " do not match predictions " +
                         shape_str(out.boxes.front().shape()));
  if (m > n) throw DataError(std::to_string(m) + " annotated actors exceed " + std::to_string(n) + " queries");
  for (const auto& acts : target.actions)
    for (std::size_t k : acts)
      if (k >= a) throw DataError("action label " + std::to_string(k) + " outside the action set");

  LossTerms terms;
  const Tensor gt_key = frame_slice(target.boxes, target.keyframe);
  const Tensor logits = out.action_logits.detach();
  Tensor total = Tensor::scalar(0.0);
  const std::size_t first = w.aux_layers ? 0 : out.boxes.size() - 1;
  for (std::size_t l = 0; l < out.boxes.size(); ++l) {
    const Tensor& tube = out.boxes[l];
    auto cost = match_cost(frame_slice(tube, target.keyframe).detach(), logits, gt_key, target.actions, w, target.weak);
    terms.matches.push_back(hungarian_match(cost, m, n));
    if (l < first) continue;
    Tensor matched = index_select(tube, terms.matches.back().assignment);
    Tensor l1 = l1_loss(matched, target.boxes) * w.l1;
    Tensor gl = giou_loss(matched, target.boxes) * w.giou;
    terms.l1 += l1.item();
    terms.giou += gl.item();
    total = total + l1 + gl;
  }

  if (w.group_ce != 0.0) {
    Tensor ce = cross_entropy(out.group_logits, {target.group}) * w.group_ce;
    terms.group_ce = ce.item();
    total = total + ce;
  }
  if (!target.weak && w.action_bce != 0.0) {
    std::vector<double> hot(n * a, 0.0);
    const auto& final_match = terms.matches.back().assignment;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k : target.actions[i]) hot[final_match[i] * a + k] = 1.0;
    Tensor bce = bce_with_logits(out.action_logits, hot) * w.action_bce;
    terms.action_bce = bce.item();
    total = total + bce;
  }
  terms.total = total;
  return terms;
}

}  // namespace react
