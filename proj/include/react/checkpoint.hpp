// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "react/model.hpp"
#include "react/optim.hpp"

namespace react {

/// Training position stored next to the weights.
struct CheckpointMeta {
  static constexpr std::uint32_t kFormat = 1;
  std::uint32_t format = kFormat;
  std::size_t step = 0;
  std::uint64_t seed = 0;
  std::string rng_state;  // std::mt19937_64 text state, may be empty
};

/// Directory layout: config.ini (ModelConfig snapshot), state.bin (named f64
/// arrays: param/<name>, opt/first/<name>, opt/second/<name>, meta/*) and
/// rng.txt. Values are stored exactly, so reloading reproduces the forward pass bit for bit.
void save_checkpoint(const std::filesystem::path& dir, const Model& model, const OptimizerState* optimizer = nullptr,
                     const CheckpointMeta& meta = {});

/// Rebuilds the model from the stored config, then overwrites every parameter.
Model load_checkpoint(const std::filesystem::path& dir, OptimizerState* optimizer = nullptr,
                      CheckpointMeta* meta = nullptr);

}  // namespace react
