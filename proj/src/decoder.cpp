// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/decoder.hpp"

#include "react/errors.hpp"

namespace react {

namespace {

constexpr double kBoxFloor = 1e-6;

}  // namespace

BoxHeadParams BoxHeadParams::init(ParamInit& init, std::size_t d) {
  return {Linear::init(init, d, d), Linear::init(init, d, d), Linear::init(init, d, 4, true)};
}

void BoxHeadParams::collect(ParameterSet& set, const std::string& prefix) const {
  fc1.collect(set, prefix + ".fc1");
  fc2.collect(set, prefix + ".fc2");
  out.collect(set, prefix + ".out");
}

Tensor box_head(const Tensor& x, const BoxHeadParams& p) {
  return linear(relu(linear(relu(linear(x, p.fc1)), p.fc2)), p.out);
}

Tensor refine_boxes(const Tensor& previous, const Tensor& offsets, bool detach) {
  return clamp(sigmoid(add(inverse_sigmoid(detach ? previous.detach() : previous), offsets)), kBoxFloor,
               1.0 - kBoxFloor);
}

DecoderLayerParams DecoderLayerParams::init(ParamInit& init, std::size_t d, std::size_t heads, std::size_t d_ff,
                                            double dropout) {
  DecoderLayerParams p;
  p.self_norm = LayerNormParams::init(init, d);
  p.self_attn = AttentionParams::init(init, d, heads, dropout);
  p.spatial_norm = LayerNormParams::init(init, d);
  p.spatial_attn = AttentionParams::init(init, d, heads, dropout);
  p.temporal_norm = LayerNormParams::init(init, d);
  p.temporal_attn = AttentionParams::init(init, d, heads, dropout);
  p.ffn_norm = LayerNormParams::init(init, d);
  p.ffn = FeedForwardParams::init(init, d, d_ff);
  p.box_norm = LayerNormParams::init(init, d);
  p.box = BoxHeadParams::init(init, d);
  return p;
}

void DecoderLayerParams::collect(ParameterSet& set, const std::string& prefix) const {
  self_norm.collect(set, prefix + ".self_norm");
  self_attn.collect(set, prefix + ".self_attn");
  spatial_norm.collect(set, prefix + ".spatial_norm");
  spatial_attn.collect(set, prefix + ".spatial_attn");
  temporal_norm.collect(set, prefix + ".temporal_norm");
  temporal_attn.collect(set, prefix + ".temporal_attn");
  ffn_norm.collect(set, prefix + ".ffn_norm");
  ffn.collect(set, prefix + ".ffn");
  box_norm.collect(set, prefix + ".box_norm");
  box.collect(set, prefix + ".box");
}

DecoderParams DecoderParams::init(ParamInit& init, std::size_t num_layers, std::size_t num_queries, std::size_t d,
                                  std::size_t heads, std::size_t d_ff, std::size_t max_frames,
                                  std::size_t num_actions, std::size_t num_groups, double dropout) {
  DecoderParams p;
  for (std::size_t i = 0; i < num_layers; ++i) p.layers.push_back(DecoderLayerParams::init(init, d, heads, d_ff, dropout));
  p.fusion = FusionParams::init(init, num_queries, d);
  p.query_embed = init.normal({num_queries, d}, 1.0);
  p.temporal = PositionalEncoding::sinusoidal(max_frames, d);
  p.gt_box_embed = Linear::init(init, 4, d);
  p.direct_norm = LayerNormParams::init(init, d);
  p.direct_box = BoxHeadParams::init(init, d);
  p.out_norm = LayerNormParams::init(init, d);
  p.action_head = Linear::init(init, d, num_actions);
  p.group_head = Linear::init(init, d, num_groups);
  return p;
}

void DecoderParams::collect(ParameterSet& set, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(set, prefix + ".layer" + std::to_string(i));
  if (use_fusion) fusion.collect(set, prefix + ".fusion");
  if (!use_fusion) set.add(prefix + ".query_embed", query_embed);
  if (teacher_forcing) gt_box_embed.collect(set, prefix + ".gt_box_embed");
  if (layers.empty()) {
    direct_norm.collect(set, prefix + ".direct_norm");
    direct_box.collect(set, prefix + ".direct_box");
  }
  out_norm.collect(set, prefix + ".out_norm");
  action_head.collect(set, prefix + ".action_head");
  group_head.collect(set, prefix + ".group_head");
}

Tensor classify_group(const Tensor& group_row, const DecoderParams& p) {
  return reshape(linear(layer_norm(group_row, p.out_norm), p.group_head), {p.group_head.weight.dim(1)});
}

Tensor classify_actions(const Tensor& actor_rows, const DecoderParams& p) {
  return linear(layer_norm(actor_rows, p.out_norm), p.action_head);
}

Tensor frame_slice(const Tensor& tube, std::size_t t) {
  return reshape(slice(tube, 1, t, t + 1), {tube.dim(0), 4});
}

namespace {

// [N x 4] -> [N x T x 4]
Tensor tile_frames(const Tensor& boxes, std::size_t frames) {
  return permute(tile_leading(boxes, frames), {1, 0, 2});
}

}  // namespace

DecoderOutput decode(const SharedRepresentation& vt, const DecoderParams& p, const RunContext& ctx,
                     const Tensor* gt_boxes) {
  const RowLayout& lay = vt.layout;
  if (lay.video_rows() == 0 || lay.text == 0 || vt.rows.dim(0) != lay.total())
    throw ContractError("shared representation layout does not describe its rows");
  const std::size_t n = p.num_queries(), frames = lay.frames, d = vt.rows.dim(1);
  if (!p.layers.empty() && frames > p.temporal.table.dim(0))
    throw ConfigError("clip has " + std::to_string(frames) + " frames, decoder table holds " +
                      std::to_string(p.temporal.table.dim(0)));
  const Tensor video = vt.video();
  const Tensor text = vt.text();

  DecoderOutput out;
  out.reference = reference_boxes(p.fusion);
  Tensor actors = p.use_fusion ? fuse(p.detach_feedback ? out.reference.detach() : out.reference, text, p.fusion)
                                : p.query_embed;
  Tensor group = vt.group();

  if (p.layers.empty()) {
    Tensor offsets = box_head(layer_norm(actors, p.direct_norm), p.direct_box);
    out.boxes.push_back(tile_frames(refine_boxes(out.reference, offsets, false), frames));
    out.embeddings.push_back(actors);
    out.action_logits = classify_actions(actors, p);
    out.group_embedding = group;
    out.group_logits = classify_group(group, p);
    return out;
  }

  // Memory for temporal cross-attention: pooled frames with their positions,
  // text rows and, under teacher forcing, embedded ground-truth boxes.
  std::vector<Tensor> memory_parts{positional_encode(mean_axis(video, 1), p.temporal, iota(frames)), text};
  if (p.teacher_forcing && ctx.training && gt_boxes != nullptr) {
    check_boxes(*gt_boxes, "teacher-forcing boxes");
    memory_parts.push_back(linear(*gt_boxes, p.gt_box_embed));
  }
  const Tensor memory = concat(memory_parts, 0);
  const Tensor zero_row = Tensor::zeros({1, d});

  Tensor h = concat({actors, group}, 0);
  Tensor previous = tile_frames(out.reference, frames);
  for (std::size_t li = 0; li < p.layers.size(); ++li) {
    const auto& L = p.layers[li];
    const double rate = L.self_attn.dropout_rate;
    Tensor pos = zero_row;
    if (p.use_fusion) {
      Tensor key = frame_slice(previous, keyframe_of(frames));
      Tensor where = li == 0 ? actors : fuse(p.detach_feedback ? key.detach() : key, text, p.fusion);
      pos = concat({where, zero_row}, 0);
    }

    Tensor x = add(layer_norm(h, L.self_norm), pos);
    h = add(h, ctx.drop(multi_head_attention(x, x, L.self_attn), rate));

    // Spatial step: the queries look at each frame's cells separately.
    Tensor per_frame = ctx.drop(
        multi_head_attention(tile_leading(add(layer_norm(h, L.spatial_norm), pos), frames), video, L.spatial_attn),
        rate);  // [T x (N+1) x d]
    h = add(h, mean_axis(per_frame, 0));

    h = add(h, ctx.drop(multi_head_attention(add(layer_norm(h, L.temporal_norm), pos), memory, L.temporal_attn), rate));
    h = add(h, ctx.drop(feed_forward(layer_norm(h, L.ffn_norm), L.ffn), rate));

    Tensor rows = slice(h, 0, 0, n);
    Tensor frame_feats = permute(slice(per_frame, 1, 0, n), {1, 0, 2});  // [N x T x d]
    Tensor z = add(reshape(layer_norm(rows, L.box_norm), {n, 1, d}), frame_feats);
    previous = refine_boxes(previous, box_head(z, L.box), li > 0 && p.detach_feedback);
    out.boxes.push_back(previous);
    out.embeddings.push_back(rows);
  }
  out.action_logits = classify_actions(out.embeddings.back(), p);
  out.group_embedding = slice(h, 0, n, n + 1);
  out.group_logits = classify_group(out.group_embedding, p);
  return out;
}

}  // namespace react
