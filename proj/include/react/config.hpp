// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "react/annotations.hpp"

namespace react {

enum class SupervisionMode { full, weak };

SupervisionMode parse_mode(const std::string& s);
std::string to_string(SupervisionMode m);

struct ModelSection {
  std::size_t frames = 8;  // sampled clip length T
  std::size_t height = 40, width = 40, channels = 1;
  std::size_t grid = 4;  // patch cells per side, HW = grid^2
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t d_ff = 256;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t queries = 4;  // N
  std::size_t max_text = 16;
  double dropout = 0.1;
  bool actor_fusion = true;
  std::size_t fusion_kernel = 3;
  bool temporal_encoding = true;
  bool fast_branch = true;
  bool teacher_forcing = false;
  std::uint64_t init_seed = 0;
};

struct LossSection {
  double l1 = 5.0;
  double giou = 2.0;
  double group_ce = 1.0;
  double action_bce = 1.0;
  bool aux_layers = true;
};

struct TrainSection {
  std::uint64_t seed = 0;
  std::string mode = "full";
  std::size_t epochs = 30;
  std::size_t batch = 4;
  std::size_t max_steps = 0;  // 0: no cap
  double peak_lr = 5e-4;
  double warmup_epochs = 5;
  double wd_start = 0.04;
  double wd_end = 0.1;
  double clip_norm = 1.0;  // 0 disables clipping
  std::size_t eval_every = 1;  // epochs
  std::string select_metric = "merged_mca";
};

struct ProbeSection {
  std::size_t epochs = 100;
  std::size_t batch = 32;
  double lr = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct DataSection {
  std::size_t clips = 64;
  std::size_t actors = 2;
  std::uint64_t corpus_seed = 0;
  double train_ratio = 0.75;
  std::uint64_t split_seed = 0;
  std::string prompt = "every player action";
  std::string vocab = "builtin";  // or a path, one word per line
};

struct LabelsSection {
  std::string actions = "spiking,setting,passing";
  std::string groups = "l-spike,l-set,l-pass,r-spike,r-set,r-pass";
  std::string merge = "l-set:l-pass,r-set:r-pass";
};

struct ModelConfig {
  static constexpr int kVersion = 1;
  int version = kVersion;
  ModelSection model;
  LossSection loss;
  TrainSection train;
  ProbeSection probe;
  DataSection data;
  LabelsSection labels;

  LabelSpace label_space() const;
  LossWeights loss_weights() const;
  SupervisionMode mode() const { return parse_mode(train.mode); }
  /// Throws ConfigError naming the first inconsistent field.
  void validate() const;
};

struct ConfigField {
  std::string section, key, doc;
  std::function<std::string(const ModelConfig&)> get;
  std::function<void(ModelConfig&, const std::string&)> set;
};

/// Every configurable field, in file order.
const std::vector<ConfigField>& config_fields();

/// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
/// comments. Missing keys keep their defaults; unknown keys are errors.
ModelConfig parse_config(std::istream& in, const std::string& source = "<config>");
ModelConfig load_config(const std::filesystem::path& path);
/// Writes every field with its doc string; parse_config reads it back exactly.
void write_config(std::ostream& os, const ModelConfig& cfg);
void save_config(const std::filesystem::path& path, const ModelConfig& cfg);
/// "section.key = value" overrides, as given on the command line.
void apply_override(ModelConfig& cfg, const std::string& assignment);
/// Field reference for --help.
std::string describe_config();

}  // namespace react
