// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "react/config.hpp"
#include "react/training.hpp"

namespace react {

struct AblationVariant {
  std::string name;
  std::size_t encoder_layers = 0;
  std::size_t decoder_layers = 0;
  bool actor_fusion = true;
};

/// features-only (no encoder, no decoder), +encoder, +encoder+decoder, and
/// the full model without actor fusion. Layer counts come from `base`.
std::vector<AblationVariant> standard_variants(const ModelConfig& base);

struct AblationRun {
  std::string variant;
  std::uint64_t seed = 0;
  double merged_mca = 0, mca = 0, keyframe_iou = 0, final_loss = 0;
};

struct AblationSummary {
  std::vector<AblationRun> runs;
  /// Seed mean of a metric for one variant.
  double mean(const std::string& variant, const std::string& metric) const;
};

/// Trains every variant once per seed (seed sets both init and training
/// seeds) on `train` and scores it on `test`.
AblationSummary run_ablation(const ModelConfig& base, const std::vector<AblationVariant>& variants,
                             const std::vector<std::uint64_t>& seeds, const Dataset& train, const Dataset& test,
                             const std::function<void(const AblationRun&)>& on_run = {});

}  // namespace react
