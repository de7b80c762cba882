// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/backbones.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "react/errors.hpp"

namespace react {

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) throw ConfigError("vocabulary is empty");
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (!lookup_.emplace(words_[i], i).second) throw ConfigError("duplicate vocabulary entry '" + words_[i] + "'");
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(path.string(), words.size() + 1, "empty vocabulary line");
    words.push_back(line);
  }
  return Vocabulary(std::move(words));
}

const Vocabulary& Vocabulary::builtin() {
  static const Vocabulary v = load(std::filesystem::path(REACT_DATA_DIR) / "vocab.txt");
  return v;
}

std::size_t Vocabulary::index(const std::string& word) const {
  auto it = lookup_.find(word);
  return it == lookup_.end() ? unk : it->second;
}

TextPrompt tokenize(const std::string& raw, const Vocabulary& vocab) {
  TextPrompt out;
  out.raw = raw;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) out.tokens.push_back(vocab.index(word));
    word.clear();
  };
  for (unsigned char c : raw) {
    if (std::isalnum(c))
      word.push_back(static_cast<char>(std::tolower(c)));
    else
      flush();
  }
  flush();
  if (out.tokens.empty()) throw DataError("prompt '" + raw + "' contains no words");
  return out;
}

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count) {
  if (count == 0) throw ConfigError("cannot sample zero frames");
  if (count > total)
    throw DataError("cannot sample " + std::to_string(count) + " frames from a clip of " + std::to_string(total));
  std::vector<std::size_t> idx(count, 0);
  if (count == 1) return idx;
  for (std::size_t i = 0; i < count; ++i)
    idx[i] = static_cast<std::size_t>(
        std::lround(static_cast<double>(i) * static_cast<double>(total - 1) / static_cast<double>(count - 1)));
  return idx;
}

VideoClip sample_frames(const VideoClip& clip, std::size_t count) {
  const auto idx = sample_indices(clip.length(), count);
  VideoClip out{index_select(clip.frames.detach(), idx), clip.frame_rate, clip.clip_id};
  return out;
}

VisualStubParams VisualStubParams::init(ParamInit& init, std::size_t height, std::size_t width, std::size_t channels,
                                        std::size_t grid, std::size_t d) {
  if (grid == 0 || height % grid != 0 || width % grid != 0)
    throw ConfigError("frame size " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by a " + std::to_string(grid) + "x" + std::to_string(grid) + " grid");
  VisualStubParams p;
  p.height = height;
  p.width = width;
  p.channels = channels;
  p.grid = grid;
  p.patch = Linear::init(init, (height / grid) * (width / grid) * channels, d);
  p.spatial = PositionalEncoding::spatial_2d(grid, grid, d);
  return p;
}

void VisualStubParams::collect(ParameterSet& set, const std::string& prefix) const {
  patch.collect(set, prefix + ".patch");
}

Tensor patch_embed(const VideoClip& clip, const VisualStubParams& p) {
  const Tensor& f = clip.frames;
  if (f.rank() != 4) throw DimensionError("clip frames must be [T x H x W x C], got " + shape_str(f.shape()));
  if (f.dim(1) % p.grid != 0 || f.dim(2) % p.grid != 0)
    throw ConfigError("frame size " + shape_str(f.shape()) + " is not divisible by the " + std::to_string(p.grid) +
                      "-cell grid");
  if (f.dim(1) != p.height || f.dim(2) != p.width || f.dim(3) != p.channels)
    throw DimensionError("clip frames " + shape_str(f.shape()) + " do not match the patch projection");
  const std::size_t t = f.dim(0), h = f.dim(1), w = f.dim(2), c = f.dim(3);
  const std::size_t ph = h / p.grid, pw = w / p.grid, patch = ph * pw * c;
  // Gather cells into [T x HW x patch]; frames are inputs, so this is plain data movement.
  std::vector<double> cells(t * p.cells() * patch);
  const auto src = f.data();
  std::size_t o = 0;
  for (std::size_t ti = 0; ti < t; ++ti)
    for (std::size_t gy = 0; gy < p.grid; ++gy)
      for (std::size_t gx = 0; gx < p.grid; ++gx)
        for (std::size_t y = 0; y < ph; ++y)
          for (std::size_t x = 0; x < pw; ++x)
            for (std::size_t ci = 0; ci < c; ++ci)
              cells[o++] = src[((ti * h + gy * ph + y) * w + gx * pw + x) * c + ci];
  return linear(Tensor::from({t, p.cells(), patch}, std::move(cells)), p.patch);
}

Tensor visual_encode(const VideoClip& clip, const VisualStubParams& p) {
  return positional_encode(patch_embed(clip, p), p.spatial, iota(p.cells()));
}

TextStubParams TextStubParams::init(ParamInit& init, std::size_t vocab_size, std::size_t max_len, std::size_t d,
                                    std::size_t heads, std::size_t d_ff) {
  TextStubParams p;
  p.max_len = max_len;
  p.embedding = init.normal({vocab_size, d}, 1.0);
  p.positions = PositionalEncoding::sinusoidal(max_len, d);
  p.norm_attn = LayerNormParams::init(init, d);
  p.norm_ffn = LayerNormParams::init(init, d);
  p.attn = AttentionParams::init(init, d, heads);
  p.ffn = FeedForwardParams::init(init, d, d_ff);
  return p;
}

void TextStubParams::collect(ParameterSet& set, const std::string& prefix) const {
  set.add(prefix + ".embedding", embedding);
  norm_attn.collect(set, prefix + ".norm_attn");
  norm_ffn.collect(set, prefix + ".norm_ffn");
  attn.collect(set, prefix + ".attn");
  ffn.collect(set, prefix + ".ffn");
}

Tensor text_encode(const TextPrompt& prompt, const TextStubParams& p, const RunContext& ctx) {
  const std::size_t vocab = p.embedding.dim(0);
  if (prompt.tokens.empty()) throw DataError("empty prompt");
  if (prompt.tokens.size() > p.max_len)
    throw DataError("prompt has " + std::to_string(prompt.tokens.size()) + " tokens, limit is " +
                    std::to_string(p.max_len));
  for (std::size_t t : prompt.tokens)
    if (t >= vocab)
      throw DataError("token index " + std::to_string(t) + " is outside the vocabulary (" + std::to_string(vocab) + ")");
  Tensor x = positional_encode(index_select(p.embedding, prompt.tokens), p.positions, iota(prompt.tokens.size()));
  Tensor n = layer_norm(x, p.norm_attn);
  x = add(x, ctx.drop(multi_head_attention(n, n, p.attn), p.attn.dropout_rate));
  return add(x, ctx.drop(feed_forward(layer_norm(x, p.norm_ffn), p.ffn), p.attn.dropout_rate));
}

}  // namespace react
