// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "react/errors.hpp"
#include "react/gradcheck.hpp"
#include "react/losses.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace react;
using namespace react::testing;

namespace {

Tensor box_tensor(const std::vector<Box>& boxes, bool grad = false) {
  std::vector<double> v;
  for (const Box& b : boxes) v.insert(v.end(), {b.cx, b.cy, b.w, b.h});
  return Tensor::from({boxes.size(), 4}, v, grad);
}

}  // namespace

TEST_CASE("giou hand values") {
  CHECK(giou(Box{0.3, 0.4, 0.2, 0.1}, Box{0.3, 0.4, 0.2, 0.1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::fabs(giou(from_corners(0, 0, 1, 1), from_corners(2, 2, 3, 3)) - (-7.0 / 9.0)) <= 1e-12);
  CHECK(std::fabs(giou(from_corners(0, 0, 2, 2), from_corners(1, 1, 3, 3)) - (-5.0 / 63.0)) <= 1e-12);
  CHECK_THROWS_AS(giou(Box{0.5, 0.5, 0.0, 0.1}, Box{0.5, 0.5, 0.1, 0.1}), ContractError);

  Tensor a = box_tensor({from_corners(0, 0, 1, 1)}), b = box_tensor({from_corners(2, 2, 3, 3)});
  CHECK(std::fabs(giou_loss(a, b).item() - 16.0 / 9.0) <= 1e-12);
  CHECK(giou_loss(a, a).item() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("giou agrees with the grid oracle and its bounds") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Box a = random_box(rng), b = random_box(rng);
    const double g = giou(a, b);
    CHECK(std::fabs(g - grid_giou(a, b)) <= 1e-2);
    CHECK(g <= iou(a, b) + 1e-15);
    CHECK(g > -1.0);
    CHECK(g <= 1.0);
    CHECK(std::fabs(giou_tensor(box_tensor({a}), box_tensor({b})).item() - g) <= 1e-15);
  }
  // Nested boxes: hull equals union.
  CHECK(giou(Box{0.5, 0.5, 0.4, 0.4}, Box{0.5, 0.5, 0.2, 0.2}) == doctest::Approx(iou(Box{0.5, 0.5, 0.4, 0.4}, Box{0.5, 0.5, 0.2, 0.2})));
}

TEST_CASE("giou and l1 losses pass grad_check") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Box> p, g;
    for (int i = 0; i < 3; ++i) {
      p.push_back(random_box(rng));
      g.push_back(random_box(rng));
    }
    Tensor pt = box_tensor(p, true), gt = box_tensor(g);
    auto rep = grad_check([&] { return add(giou_loss(pt, gt), l1_loss(pt, gt)); }, {pt});
    CHECK(rep.max_rel_error <= 1e-4);
  }
}

TEST_CASE("l1 loss examples") {
  Tensor a = box_tensor({Box{0.5, 0.5, 0.2, 0.2}}), b = box_tensor({Box{0.6, 0.5, 0.2, 0.4}});
  CHECK(std::fabs(l1_loss(a, b).item() - 0.075) <= 1e-15);
  CHECK(l1_loss(a, a).item() == 0.0);
  CHECK(l1_loss(a, b).item() == l1_loss(b, a).item());
}

TEST_CASE("hungarian examples") {
  auto r = hungarian_match({1, 2, 2, 1}, 2, 2);
  CHECK(r.assignment == std::vector<std::size_t>{0, 1});
  CHECK(r.total_cost == 2.0);
  auto one = hungarian_match({5}, 1, 1);
  CHECK(one.assignment == std::vector<std::size_t>{0});
  CHECK(one.total_cost == 5.0);
  CHECK_THROWS_AS(hungarian_match({1, 2, 3}, 3, 1), ContractError);
  auto tie = hungarian_match(std::vector<double>(12, 0.7), 3, 4);
  CHECK(tie.assignment == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("hungarian equals brute force on 200 random instances") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = uniform_size(rng, 1, 7), m = uniform_size(rng, 1, std::min<std::size_t>(n, 6));
    std::vector<double> cost(m * n);
    // Every fourth instance uses small integers so ties are common.
    for (double& c : cost) c = trial % 4 == 0 ? static_cast<double>(uniform_size(rng, 0, 3)) : u(rng);
    auto [best, arg] = brute_force(cost, m, n);
    auto r = hungarian_match(cost, m, n);
    CHECK(std::fabs(r.total_cost - best) <= 1e-9);
    CHECK(r.assignment == arg);
  }
  std::vector<double> c56(30);
  for (double& c : c56) c = u(rng);
  CHECK(std::fabs(hungarian_match(c56, 5, 6).total_cost - brute_force(c56, 5, 6).first) <= 1e-12);
}

TEST_CASE("match cost by hand") {
  LossWeights w;
  Tensor pred = box_tensor({Box{0.5, 0.5, 0.2, 0.2}, Box{0.3, 0.3, 0.2, 0.2}});
  Tensor gt = box_tensor({Box{0.5, 0.5, 0.2, 0.2}, Box{0.6, 0.5, 0.2, 0.4}});
  Tensor logits = Tensor::from({2, 2}, {2.0, -1.0, 0.0, 0.5});
  auto c = match_cost(pred, logits, gt, {{0}, {1}}, w, false);
  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const double g10 = giou(Box{0.5, 0.5, 0.2, 0.2}, Box{0.6, 0.5, 0.2, 0.4});
  const double g01 = giou(Box{0.3, 0.3, 0.2, 0.2}, Box{0.5, 0.5, 0.2, 0.2});
  const double g11 = giou(Box{0.3, 0.3, 0.2, 0.2}, Box{0.6, 0.5, 0.2, 0.4});
  CHECK(std::fabs(c[0] - (0.0 + 0.0 + (1 - sig(2.0)))) <= 1e-6);
  CHECK(std::fabs(c[1] - (5 * 0.4 + 2 * (1 - g01) + (1 - sig(0.0)))) <= 1e-6);
  CHECK(std::fabs(c[2] - (5 * 0.3 + 2 * (1 - g10) + (1 - sig(-1.0)))) <= 1e-6);
  CHECK(std::fabs(c[3] - (5 * 0.7 + 2 * (1 - g11) + (1 - sig(0.5)))) <= 1e-6);
  auto weak = match_cost(pred, logits, gt, {}, w, true);
  CHECK(std::fabs(weak[0]) <= 1e-15);

  // Identical predictions: every assignment ties, lowest index wins.
  Tensor same = box_tensor({Box{0.4, 0.4, 0.2, 0.2}, Box{0.4, 0.4, 0.2, 0.2}, Box{0.4, 0.4, 0.2, 0.2}});
  auto tc = match_cost(same, Tensor::zeros({3, 2}), gt, {{0}, {1}}, w, false);
  CHECK(hungarian_match(tc, 2, 3).assignment == std::vector<std::size_t>{0, 1});
}

namespace {

DecoderOutput one_layer(const Tensor& tube, std::size_t actions = 2, std::size_t groups = 3) {
  DecoderOutput out;
  out.boxes = {tube};
  out.embeddings = {Tensor::zeros({tube.dim(0), 4})};
  out.action_logits = Tensor::zeros({tube.dim(0), actions}, true);
  out.group_logits = Tensor::zeros({groups}, true);
  return out;
}

}  // namespace

TEST_CASE("objective decomposition") {
  LossWeights w;
  w.group_ce = 0;
  w.action_bce = 0;
  Tensor pred = Tensor::from({1, 1, 4}, {0.5, 0.5, 0.2, 0.2});
  Tensor gt = Tensor::from({1, 1, 4}, {0.6, 0.5, 0.2, 0.4});
  ClipTarget t{gt, {{0}}, 0, 0, false};
  auto terms = total_objective(one_layer(pred), t, w);
  const double g = giou(Box{0.5, 0.5, 0.2, 0.2}, Box{0.6, 0.5, 0.2, 0.4});
  CHECK(std::fabs(terms.total.item() - (5 * 0.075 + 2 * (1 - g))) <= 1e-12);
  // The weighting itself: L1 = 0.1 and gIoU loss = 0.3 give 1.1.
  CHECK(std::fabs(w.l1 * 0.1 + w.giou * 0.3 - 1.1) <= 1e-12);

  auto perfect = total_objective(one_layer(gt), t, w);
  CHECK(std::fabs(perfect.total.item()) <= 1e-12);
  CHECK_THROWS_AS(total_objective(one_layer(pred), ClipTarget{}, w), DataError);
}

TEST_CASE("objective per-layer accumulation, gt permutation and weak mode") {
  std::mt19937_64 rng(4);
  auto tube = [&](std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n * 2; ++i) {
      Box b = random_box(rng);
      v.insert(v.end(), {b.cx, b.cy, b.w, b.h});
    }
    return Tensor::from({n, 2, 4}, v, true);
  };
  DecoderOutput out = one_layer(tube(3));
  out.boxes.insert(out.boxes.begin(), tube(3));
  out.action_logits = uniform({3, 2}, rng);
  out.group_logits = uniform({3}, rng);
  Tensor gt = tube(2).detach();
  ClipTarget t{gt, {{0}, {0, 1}}, 2, 1, false};
  LossWeights w;
  auto all = total_objective(out, t, w);
  CHECK(all.matches.size() == 2);
  CHECK(std::fabs(all.total.item() - (all.l1 + all.giou + all.group_ce + all.action_bce)) <= 1e-12);

  w.aux_layers = false;
  auto last = total_objective(out, t, w);
  DecoderOutput final_only = out;
  final_only.boxes = {out.boxes.back()};
  w.aux_layers = true;
  CHECK(std::fabs(last.total.item() - total_objective(final_only, t, w).total.item()) <= 1e-12);
  CHECK(last.total.item() < all.total.item());

  ClipTarget swapped{index_select(gt, {1, 0}), {{0, 1}, {0}}, 2, 1, false};
  CHECK(std::fabs(total_objective(out, swapped, w).total.item() - all.total.item()) <= 1e-12);

  ClipTarget weak = t;
  weak.weak = true;
  weak.actions = {{}, {}};
  auto wt = total_objective(out, weak, w);
  CHECK(wt.action_bce == 0.0);
  CHECK(std::fabs(wt.total.item() - (wt.l1 + wt.giou + wt.group_ce)) <= 1e-12);
}
