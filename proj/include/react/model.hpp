// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "react/annotations.hpp"
#include "react/backbones.hpp"
#include "react/config.hpp"
#include "react/decoder.hpp"
#include "react/encoder.hpp"
#include "react/nn.hpp"

namespace react {

struct ModelOutput {
  SharedRepresentation shared;
  DecoderOutput decoded;
};

/// Visual and text stubs, encoder and decoder wired per a ModelConfig.
struct Model {
  ModelConfig config;
  LabelSpace labels;
  Vocabulary vocab{{"<unk>"}};
  VisualStubParams visual;
  TextStubParams text;
  EncoderParams encoder;
  DecoderParams decoder;
  ParameterSet params;  // every trainable leaf, in a fixed order

  /// Initialises all parameters from config.model.init_seed.
  static Model build(const ModelConfig& config);

  TextPrompt prompt(const std::string& raw) const { return tokenize(raw, vocab); }
  /// Frame indices the model reads from a clip of `total` frames.
  std::vector<std::size_t> frame_indices(std::size_t total) const;

  /// gt_keyframe_boxes [M x 4] only matter with teacher forcing while training.
  ModelOutput forward(const VideoClip& clip, const TextPrompt& prompt, const RunContext& ctx = {},
                      const Tensor* gt_keyframe_boxes = nullptr) const;
};

}  // namespace react
