// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "react/nn.hpp"

// Small trainable stand-ins for the pretrained video and text backbones.
namespace react {

/// Raster clip [T_total x H x W x C].
struct VideoClip {
  Tensor frames;
  double frame_rate = 25.0;
  std::string clip_id;

  std::size_t length() const { return frames.dim(0); }
};

struct TextPrompt {
  std::vector<std::size_t> tokens;
  std::string raw;
};

/// Closed word list; index 0 is the unknown-word token.
class Vocabulary {
 public:
  static constexpr std::size_t unk = 0;

  explicit Vocabulary(std::vector<std::string> words);
  /// One token per line, line number = index.
  static Vocabulary load(const std::filesystem::path& path);
  /// The vocabulary shipped in data/vocab.txt.
  static const Vocabulary& builtin();

  std::size_t size() const { return words_.size(); }
  std::size_t index(const std::string& word) const;
  const std::string& word(std::size_t i) const { return words_.at(i); }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Lowercases, splits on anything that is not a letter or digit and maps each
/// word through the vocabulary. Throws DataError when no word remains.
TextPrompt tokenize(const std::string& raw, const Vocabulary& vocab);

/// T evenly spaced frame indices from 0 to T_total - 1, rounded to nearest.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t count);
VideoClip sample_frames(const VideoClip& clip, std::size_t count);

struct VisualStubParams {
  std::size_t height = 0, width = 0, channels = 0;
  std::size_t grid = 0;  // cells per side
  Linear patch;          // (ph * pw * C) -> d
  PositionalEncoding spatial;

  static VisualStubParams init(ParamInit& init, std::size_t height, std::size_t width, std::size_t channels,
                               std::size_t grid, std::size_t d);
  std::size_t cells() const { return grid * grid; }
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// Per-cell linear projection [T x HW x d], no positional term.
Tensor patch_embed(const VideoClip& clip, const VisualStubParams& p);
/// patch_embed plus the 2-D sinusoidal cell encoding.
Tensor visual_encode(const VideoClip& clip, const VisualStubParams& p);

struct TextStubParams {
  std::size_t max_len = 16;
  Tensor embedding;  // [vocab x d]
  PositionalEncoding positions;
  LayerNormParams norm_attn, norm_ffn;
  AttentionParams attn;
  FeedForwardParams ffn;

  static TextStubParams init(ParamInit& init, std::size_t vocab_size, std::size_t max_len, std::size_t d,
                             std::size_t heads, std::size_t d_ff);
  void collect(ParameterSet& set, const std::string& prefix) const;
};

/// Embedding lookup, sinusoidal positions and one pre-norm attention/FFN
/// block; output [L x d].
Tensor text_encode(const TextPrompt& prompt, const TextStubParams& p, const RunContext& ctx = {});

}  // namespace react
