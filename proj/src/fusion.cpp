// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/fusion.hpp"

#include <cmath>
#include <numbers>

#include "react/errors.hpp"

namespace react {

FusionParams FusionParams::init(ParamInit& init, std::size_t num_queries, std::size_t d, std::size_t kernel) {
  if (num_queries == 0) throw ConfigError("actor fusion needs at least one query");
  if (d % 4 != 0) throw ConfigError("box coordinate encoding needs a width divisible by 4, got " + std::to_string(d));
  return {Linear::init(init, 4, d), LayerNormParams::init(init, d), Conv1dParams::init(init, kernel, d, d),
          init.zeros({num_queries, 4})};
}

void FusionParams::collect(ParameterSet& set, const std::string& prefix) const {
  box_embed.collect(set, prefix + ".box_embed");
  text_norm.collect(set, prefix + ".text_norm");
  refine.collect(set, prefix + ".refine");
  set.add(prefix + ".ref_offsets", ref_offsets);
}

Tensor box_coordinate_encoding(const Tensor& boxes, std::size_t d) {
  if (d % 4 != 0) throw ConfigError("box coordinate encoding needs a width divisible by 4");
  const std::size_t per = d / 4;
  std::vector<double> freq(4 * d, 0.0), phase(d, 0.0);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t j = 0; j < per; ++j) {
      const double k = static_cast<double>(j / 2);
      freq[c * d + c * per + j] = 2.0 * std::numbers::pi / std::pow(10000.0, 2.0 * k / static_cast<double>(per));
      // cos(x) = sin(x + pi/2) on odd channels
      if (j % 2 == 1) phase[c * per + j] = std::numbers::pi / 2.0;
    }
  return sin(add(matmul(boxes, Tensor::from({4, d}, std::move(freq))), Tensor::from({d}, std::move(phase))));
}

void check_boxes(const Tensor& boxes, const char* what) {
  if (boxes.shape().back() != 4) throw DimensionError(std::string(what) + " must end in 4 coordinates");
  const auto b = boxes.data();
  for (std::size_t i = 0; i < b.size(); i += 4) {
    for (std::size_t c = 0; c < 4; ++c)
      if (!(b[i + c] >= 0.0 && b[i + c] <= 1.0))
        throw ContractError(std::string(what) + " has a coordinate outside [0, 1]: " + std::to_string(b[i + c]));
    if (!(b[i + 2] > 0.0 && b[i + 3] > 0.0)) throw ContractError(std::string(what) + " has a box with no extent");
  }
}

Tensor fuse(const Tensor& boxes, const Tensor& text, const FusionParams& p) {
  if (boxes.rank() != 2) throw DimensionError("fuse expects boxes [N x 4], got " + shape_str(boxes.shape()));
  check_boxes(boxes, "actor boxes");
  const std::size_t n = boxes.dim(0), d = p.box_embed.weight.dim(1);
  Tensor box = add(linear(boxes, p.box_embed), box_coordinate_encoding(boxes, d));
  Tensor pooled = tile_leading(mean_axis(layer_norm(text, p.text_norm), 0), n);
  Tensor halves = reshape(concat({box, pooled}, 1), {n, 2, d});
  return conv1d(mean_axis(halves, 1), p.refine);
}

Tensor reference_boxes(const FusionParams& p) {
  const std::size_t n = p.num_queries();
  std::vector<double> base(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    base[i * 4 + 0] = 0.5;
    base[i * 4 + 1] = 0.5;
    base[i * 4 + 2] = 0.1;
    base[i * 4 + 3] = 0.1;
  }
  return sigmoid(add(inverse_sigmoid(Tensor::from({n, 4}, std::move(base))), p.ref_offsets));
}

}  // namespace react
