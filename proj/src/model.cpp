// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/model.hpp"

#include "react/errors.hpp"

namespace react {

Model Model::build(const ModelConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  m.labels = config.label_space();
  m.vocab = config.data.vocab == "builtin" ? Vocabulary::builtin() : Vocabulary::load(config.data.vocab);
  const auto& c = config.model;
  ParamInit init(c.init_seed);
  m.visual = VisualStubParams::init(init, c.height, c.width, c.channels, c.grid, c.d_model);
  m.text = TextStubParams::init(init, m.vocab.size(), c.max_text, c.d_model, c.heads, c.d_ff);
  m.encoder = EncoderParams::init(init, c.encoder_layers, c.d_model, c.heads, c.d_ff, c.frames, c.dropout);
  m.encoder.temporal_encoding = c.temporal_encoding;
  m.encoder.fast_branch = c.fast_branch;
  m.decoder = DecoderParams::init(init, c.decoder_layers, c.queries, c.d_model, c.heads, c.d_ff, c.frames,
                                  m.labels.actions.size(), m.labels.groups.size(), c.dropout);
  if (c.fusion_kernel != 3) {
    ParamInit fusion_init(c.init_seed ^ 0xf00dULL);
    m.decoder.fusion = FusionParams::init(fusion_init, c.queries, c.d_model, c.fusion_kernel);
  }
  m.decoder.use_fusion = c.actor_fusion;
  m.decoder.teacher_forcing = c.teacher_forcing;
  m.visual.collect(m.params, "visual");
  m.text.collect(m.params, "text");
  m.encoder.collect(m.params, "encoder");
  m.decoder.collect(m.params, "decoder");
  return m;
}

std::vector<std::size_t> Model::frame_indices(std::size_t total) const {
  if (total < config.model.frames)
    throw DataError("clip has " + std::to_string(total) + " frames, the model reads " +
                    std::to_string(config.model.frames));
  return sample_indices(total, config.model.frames);
}

ModelOutput Model::forward(const VideoClip& clip, const TextPrompt& prompt, const RunContext& ctx,
                           const Tensor* gt_keyframe_boxes) const {
  const VideoClip sampled = clip.length() == config.model.frames ? clip : sample_frames(clip, config.model.frames);
  const Tensor v_f = visual_encode(sampled, visual);
  const Tensor t_f = text_encode(prompt, text, ctx);
  ModelOutput out;
  out.shared = encode(v_f, t_f, encoder, ctx);
  out.decoded = decode(out.shared, decoder, ctx, gt_keyframe_boxes);
  return out;
}

}  // namespace react
