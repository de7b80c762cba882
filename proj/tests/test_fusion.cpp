// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "react/errors.hpp"
#include "react/fusion.hpp"
#include "react/gradcheck.hpp"
#include "test_util.hpp"

using namespace react;
using namespace react::testing;

namespace {

Tensor random_boxes(std::size_t n, std::mt19937_64& rng, bool grad = false) {
  std::uniform_real_distribution<double> c(0.2, 0.8), s(0.05, 0.3);
  std::vector<double> b;
  for (std::size_t i = 0; i < n; ++i) b.insert(b.end(), {c(rng), c(rng), s(rng), s(rng)});
  return Tensor::from({n, 4}, b, grad);
}

std::vector<double> mean_text(const std::vector<double>& t, std::size_t l, std::size_t d) {
  std::vector<double> m(d, 0.0);
  for (std::size_t r = 0; r < l; ++r) {
    double mu = 0.0, var = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += t[r * d + c] / static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) var += (t[r * d + c] - mu) * (t[r * d + c] - mu) / static_cast<double>(d);
    for (std::size_t c = 0; c < d; ++c) m[c] += (t[r * d + c] - mu) / std::sqrt(var + 1e-5) / static_cast<double>(l);
  }
  return m;
}

}  // namespace

TEST_CASE("reference boxes start at the image centre") {
  ParamInit init(1);
  auto one = FusionParams::init(init, 1, 8);
  auto r = reference_boxes(one).to_vector();
  const std::vector<double> want{0.5, 0.5, 0.1, 0.1};
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::fabs(r[c] - want[c]) <= 1e-15);
  auto many = reference_boxes(FusionParams::init(init, 5, 8)).to_vector();
  for (std::size_t i = 0; i < 20; ++i) CHECK(many[i] == many[i % 4]);
  CHECK_THROWS_AS(FusionParams::init(init, 0, 8), ConfigError);
}

TEST_CASE("hand-set d=4 fusion averages the box and text halves") {
  ParamInit init(2);
  auto p = FusionParams::init(init, 1, 4, 1);
  p.refine = Conv1dParams::identity(4);
  p.box_embed = {Tensor::from({4, 4}, {1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, 1, 0, 0, 0, -1}),
                 Tensor::from({4}, {0.1, 0, 0, 0})};
  const std::vector<double> b{0.3, 0.6, 0.2, 0.125};
  const std::vector<double> t{1, 2, 3, 6, -1, 0, 0, 1};
  // Embedding by hand: b W + bias, plus sin(2 pi x) per coordinate (one channel each).
  const std::vector<double> emb{0.3 + 0.1, 1.2, 0.2, 0.2 - 0.125};
  const auto tm = mean_text(t, 2, 4);
  auto got = fuse(Tensor::from({1, 4}, b), Tensor::from({2, 4}, t), p).to_vector();
  for (std::size_t c = 0; c < 4; ++c) {
    const double enc = std::sin(2.0 * std::numbers::pi * b[c]);
    CHECK(std::fabs(got[c] - (emb[c] + enc + tm[c]) / 2.0) <= 1e-12);
  }
}

TEST_CASE("single actor with an identity kernel returns the averaged row") {
  ParamInit init(3);
  auto p = FusionParams::init(init, 1, 8, 3);
  std::mt19937_64 rng(3);
  Tensor b = random_boxes(1, rng), t = uniform({3, 8}, rng, -1, 1, false);
  p.refine = Conv1dParams::identity(8);
  auto avg = fuse(b, t, p).to_vector();
  auto emb = add(linear(b, p.box_embed), box_coordinate_encoding(b, 8)).to_vector();
  auto tm = mean_text(t.to_vector(), 3, 8);
  for (std::size_t c = 0; c < 8; ++c) CHECK(std::fabs(avg[c] - (emb[c] + tm[c]) / 2.0) <= 1e-12);
  // A k=3 kernel at N=1 only sees its centre tap.
  auto p3 = FusionParams::init(init, 1, 8, 3);
  p3.box_embed = p.box_embed;
  p3.text_norm = p.text_norm;
  auto y3 = fuse(b, t, p3).to_vector();
  const auto k3 = p3.refine.kernel.data();
  for (std::size_t o = 0; o < 8; ++o) {
    double s = p3.refine.bias[o];
    for (std::size_t i = 0; i < 8; ++i) s += avg[i] * k3[(1 * 8 + i) * 8 + o];
    CHECK(std::fabs(y3[o] - s) <= 1e-12);
  }
}

TEST_CASE("symmetric inputs give identical interior rows") {
  ParamInit init(4);
  auto p = FusionParams::init(init, 5, 8, 3);
  std::mt19937_64 rng(4);
  Tensor one = random_boxes(1, rng);
  Tensor boxes = index_select(one, {0, 0, 0, 0, 0});
  auto y = fuse(boxes, uniform({2, 8}, rng, -1, 1, false), p).to_vector();
  for (std::size_t r = 2; r < 4; ++r)
    for (std::size_t c = 0; c < 8; ++c) CHECK(y[r * 8 + c] == doctest::Approx(y[8 + c]).epsilon(1e-14));
  // Edge rows see zero padding, so they generally differ.
  CHECK(max_abs_diff(std::vector<double>(y.begin(), y.begin() + 8), std::vector<double>(y.begin() + 8, y.begin() + 16)) >
        1e-9);
}

TEST_CASE("actor permutation equivariance holds for k=1 and breaks for k=3") {
  ParamInit init(5);
  std::mt19937_64 rng(5);
  Tensor boxes = random_boxes(4, rng), text = uniform({3, 8}, rng, -1, 1, false);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  auto k1 = FusionParams::init(init, 4, 8, 1);
  CHECK(max_abs_diff(index_select(fuse(boxes, text, k1), perm).to_vector(),
                     fuse(index_select(boxes, perm), text, k1).to_vector()) <= 1e-12);
  auto k3 = FusionParams::init(init, 4, 8, 3);
  CHECK(max_abs_diff(index_select(fuse(boxes, text, k3), perm).to_vector(),
                     fuse(index_select(boxes, perm), text, k3).to_vector()) > 1e-6);
}

TEST_CASE("fusion errors and gradients") {
  ParamInit init(6);
  auto p = FusionParams::init(init, 2, 8);
  CHECK_THROWS_AS(fuse(Tensor::from({1, 4}, {0.5, 0.5, 0.0, 0.1}), Tensor::zeros({1, 8}), p), ContractError);
  CHECK_THROWS_AS(fuse(Tensor::from({1, 4}, {0.5, 1.5, 0.1, 0.1}), Tensor::zeros({1, 8}), p), ContractError);

  std::mt19937_64 rng(6);
  Tensor boxes = random_boxes(3, rng, true), text = uniform({3, 8}, rng);
  Tensor w = uniform({3, 8}, rng, -1, 1, false);
  auto rep = grad_check([&] { return sum(mul(fuse(boxes, text, p), w)); },
                        {boxes, text, p.box_embed.weight, p.text_norm.gamma, p.refine.kernel, p.refine.bias});
  CHECK(rep.max_rel_error <= 1e-4);
  CHECK(rep.excluded == 0);
  Tape tape;
  tape.backward(sum(mul(fuse(boxes, text, p), w)));
  double gb = 0, gt = 0;
  for (double g : boxes.grad()) gb += g * g;
  for (double g : text.grad()) gt += g * g;
  CHECK(gb > 0.0);
  CHECK(gt > 0.0);
}
