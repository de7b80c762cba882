// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/encoder.hpp"

#include "react/errors.hpp"

namespace react {

Tensor SharedRepresentation::video() const {
  return reshape(slice(rows, 0, 0, layout.video_rows()), {layout.frames, layout.cells, rows.dim(1)});
}

Tensor SharedRepresentation::text() const { return slice(rows, 0, layout.text_begin(), layout.group_row()); }

Tensor SharedRepresentation::group() const { return slice(rows, 0, layout.group_row(), layout.total()); }

CrossModalParams CrossModalParams::init(ParamInit& init, std::size_t d, std::size_t heads, double dropout) {
  return {LayerNormParams::init(init, d), LayerNormParams::init(init, d), AttentionParams::init(init, d, heads, dropout),
          LayerNormParams::init(init, d), LayerNormParams::init(init, d), AttentionParams::init(init, d, heads, dropout)};
}

void CrossModalParams::collect(ParameterSet& set, const std::string& prefix) const {
  v2t_query.collect(set, prefix + ".v2t_query");
  v2t_key.collect(set, prefix + ".v2t_key");
  v2t.collect(set, prefix + ".v2t");
  t2v_query.collect(set, prefix + ".t2v_query");
  t2v_key.collect(set, prefix + ".t2v_key");
  t2v.collect(set, prefix + ".t2v");
}

EncoderLayerParams EncoderLayerParams::init(ParamInit& init, std::size_t d, std::size_t heads, std::size_t d_ff,
                                            double dropout) {
  EncoderLayerParams p;
  p.text_norm = LayerNormParams::init(init, d);
  p.text_self = AttentionParams::init(init, d, heads, dropout);
  p.temporal_norm = LayerNormParams::init(init, d);
  p.temporal_self = AttentionParams::init(init, d, heads, dropout);
  p.group_norm = LayerNormParams::init(init, d);
  p.group_attn = AttentionParams::init(init, d, heads, dropout);
  p.fast_norm = LayerNormParams::init(init, d);
  p.fast = Conv1dParams::init(init, 3, d, d);
  p.cross = CrossModalParams::init(init, d, heads, dropout);
  p.ffn_norm = LayerNormParams::init(init, d);
  p.ffn = FeedForwardParams::init(init, d, d_ff);
  return p;
}

void EncoderLayerParams::collect(ParameterSet& set, const std::string& prefix) const {
  text_norm.collect(set, prefix + ".text_norm");
  text_self.collect(set, prefix + ".text_self");
  temporal_norm.collect(set, prefix + ".temporal_norm");
  temporal_self.collect(set, prefix + ".temporal_self");
  group_norm.collect(set, prefix + ".group_norm");
  group_attn.collect(set, prefix + ".group_attn");
  fast_norm.collect(set, prefix + ".fast_norm");
  fast.collect(set, prefix + ".fast");
  cross.collect(set, prefix + ".cross");
  ffn_norm.collect(set, prefix + ".ffn_norm");
  ffn.collect(set, prefix + ".ffn");
}

EncoderParams EncoderParams::init(ParamInit& init, std::size_t num_layers, std::size_t d, std::size_t heads,
                                  std::size_t d_ff, std::size_t max_frames, double dropout) {
  EncoderParams p;
  for (std::size_t i = 0; i < num_layers; ++i) p.layers.push_back(EncoderLayerParams::init(init, d, heads, d_ff, dropout));
  p.group_token = init.normal({1, d}, 0.02);
  p.temporal = PositionalEncoding::sinusoidal(max_frames, d);
  p.final_norm = LayerNormParams::init(init, d);
  return p;
}

void EncoderParams::collect(ParameterSet& set, const std::string& prefix) const {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(set, prefix + ".layer" + std::to_string(i));
  set.add(prefix + ".group_token", group_token);
  if (!layers.empty()) final_norm.collect(set, prefix + ".final_norm");
}

std::pair<Tensor, Tensor> cross_modal_block(const Tensor& video_rows, const Tensor& text_rows,
                                            const CrossModalParams& p, const RunContext& ctx) {
  Tensor v = add(video_rows, ctx.drop(multi_head_attention(layer_norm(video_rows, p.v2t_query),
                                                           layer_norm(text_rows, p.v2t_key), p.v2t),
                                      p.v2t.dropout_rate));
  Tensor t = add(text_rows, ctx.drop(multi_head_attention(layer_norm(text_rows, p.t2v_query),
                                                          layer_norm(v, p.t2v_key), p.t2v),
                                     p.t2v.dropout_rate));
  return {v, t};
}

namespace {

// One layer over video [T x HW x d], text [L x d] and group [1 x d].
void encoder_layer(Tensor& video, Tensor& text, Tensor& group, const EncoderLayerParams& p, const EncoderParams& enc,
                   const RunContext& ctx) {
  const std::size_t frames = video.dim(0), cells = video.dim(1), d = video.dim(2);
  const double rate = p.text_self.dropout_rate;

  Tensor tn = layer_norm(text, p.text_norm);
  text = add(text, ctx.drop(multi_head_attention(tn, tn, p.text_self), rate));

  // Temporal self-attention: each spatial cell attends across its frames.
  Tensor per_cell = layer_norm(permute(video, {1, 0, 2}), p.temporal_norm);
  if (enc.temporal_encoding) per_cell = positional_encode(per_cell, enc.temporal, iota(frames));
  video = add(video, permute(ctx.drop(multi_head_attention(per_cell, per_cell, p.temporal_self), rate), {1, 0, 2}));

  Tensor flat = reshape(video, {frames * cells, d});
  Tensor pool = layer_norm(concat({flat, group}, 0), p.group_norm);
  group = add(group, ctx.drop(multi_head_attention(slice(pool, 0, frames * cells, frames * cells + 1), pool,
                                                   p.group_attn),
                              rate));

  if (enc.fast_branch) {
    Tensor pooled = mean_axis(layer_norm(video, p.fast_norm), 1);
    video = add(video, reshape(conv1d(pooled, p.fast), {frames, 1, d}));
  }

  auto [rows, t2] = cross_modal_block(concat({reshape(video, {frames * cells, d}), group}, 0), text, p.cross, ctx);
  text = t2;
  Tensor all = concat({rows, text}, 0);
  all = add(all, ctx.drop(feed_forward(layer_norm(all, p.ffn_norm), p.ffn), rate));
  video = reshape(slice(all, 0, 0, frames * cells), {frames, cells, d});
  group = slice(all, 0, frames * cells, frames * cells + 1);
  text = slice(all, 0, frames * cells + 1, all.dim(0));
}

}  // namespace

SharedRepresentation encode(const Tensor& v_f, const Tensor& t_f, const EncoderParams& p, const RunContext& ctx) {
  if (v_f.rank() != 3) throw DimensionError("video features must be [T x HW x d], got " + shape_str(v_f.shape()));
  if (t_f.rank() != 2) throw DimensionError("text features must be [L x d], got " + shape_str(t_f.shape()));
  const std::size_t d = p.group_token.dim(1);
  if (v_f.dim(2) != d || t_f.dim(1) != d)
    throw DimensionError("feature widths " + shape_str(v_f.shape()) + " / " + shape_str(t_f.shape()) +
                         " do not match the encoder width " + std::to_string(d));
  if (!p.layers.empty() && v_f.dim(0) > p.temporal.table.dim(0))
    throw ConfigError("clip has " + std::to_string(v_f.dim(0)) + " frames, temporal table holds " +
                      std::to_string(p.temporal.table.dim(0)));

  Tensor video = v_f, text = t_f, group = p.group_token;
  for (const auto& layer : p.layers) encoder_layer(video, text, group, layer, p, ctx);
  const RowLayout layout{v_f.dim(0), v_f.dim(1), t_f.dim(0)};
  Tensor rows = concat({reshape(video, {layout.video_rows(), d}), text, group}, 0);
  if (!p.layers.empty()) rows = layer_norm(rows, p.final_norm);
  return {rows, layout};
}

}  // namespace react
