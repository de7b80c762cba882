// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "react/annotations.hpp"
#include "react/backbones.hpp"
#include "react/config.hpp"
#include "react/metrics.hpp"
#include "react/model.hpp"
#include "react/optim.hpp"
#include "react/synth.hpp"

namespace react {

/// Clips with their annotations, index-aligned.
struct Dataset {
  std::vector<VideoClip> clips;
  std::vector<SceneAnnotation> annotations;

  std::size_t size() const { return clips.size(); }
  static Dataset from_corpus(const Corpus& corpus);
  /// Clips whose ids appear in `ids`, in that order.
  Dataset select(const std::vector<std::string>& ids) const;
};

/// Synthetic corpus for a config ([data] + [model] raster), split per [data].
std::pair<Dataset, Dataset> synthetic_splits(const ModelConfig& cfg);

struct ActorPrediction {
  std::size_t query = 0;
  std::optional<std::size_t> gt;  // matched annotated actor
  BoxArray keyframe_box{};
  std::vector<double> action_scores;  // sigmoid per action
  std::vector<std::size_t> actions;   // scores > 0.5, or the argmax when none passes
  double iou = 0.0;                   // with the matched actor's keyframe box
};

struct ClipPrediction {
  std::string clip_id;
  std::size_t group = 0;
  double group_confidence = 0.0;
  std::vector<ActorPrediction> actors;  // one per query
};

struct EvalResult {
  std::size_t clips = 0;
  double mca = 0, merged_mca = 0, mpca = 0;  // group activity
  double action_mca = 0;                     // argmax action of matched queries vs first gt action
  PrfScores prf;                             // matched queries' action sets vs gt sets
  double keyframe_iou = 0;                   // mean over matched keyframe boxes
  double loss = 0, l1 = 0, giou = 0, group_ce = 0, action_bce = 0;  // mean objective
  std::map<std::size_t, double> recall;  // R@K when retrieval ran
  std::vector<ClipPrediction> predictions;

  /// Named scalar for checkpoint selection and logs.
  double metric(const std::string& name) const;
  std::map<std::string, double> scalars() const;
};

struct EvalOptions {
  SupervisionMode mode = SupervisionMode::full;
  std::vector<std::size_t> recall_k;  // empty: skip retrieval
};

/// Matching for metrics uses keyframe boxes only (L1 + gIoU cost).
EvalResult evaluate(const Model& model, const Dataset& data, const EvalOptions& opt = {});

/// Ranks each clip's queries for a text prompt: cosine similarity between
/// the pooled text rows and the final actor embeddings.
struct RetrievalHit {
  std::size_t query = 0;
  double score = 0;
  BoxArray keyframe_box{};
};
std::vector<RetrievalHit> retrieve(const Model& model, const VideoClip& clip, const std::string& prompt);

/// One JSON line per clip: clip_id, group, confidence, actors[{query, labels, scores, box}].
std::string prediction_record(const ClipPrediction& p, const LabelSpace& labels);

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: write nothing
  const Dataset* eval = nullptr;  // checkpoint selection; falls back to the train set
  std::function<void(const std::string&)> on_record;  // every log line as written
};

struct TrainResult {
  std::vector<std::string> log;  // JSON lines, deterministic for a given config
  std::size_t steps = 0;
  double best_metric = 0;
  std::size_t best_step = 0;
  EvalResult last_eval;
  OptimizerState optimizer;
};

ScheduleConfig schedule_for(const ModelConfig& cfg, std::size_t train_clips);

/// Seeded loop: shuffle, forward, total_objective, backward, clip, Adam.
/// A non-finite loss or gradient aborts with StateError; the best checkpoint on disk is kept.
TrainResult train(Model& model, const Dataset& data, const TrainOptions& opt = {});

/// Targets for one clip under a supervision mode.
ClipTarget clip_target(const Model& model, const SceneAnnotation& a, SupervisionMode mode);

// ---- linear probe ---------------------------------------------------------

struct ProbeResult {
  Linear head;
  double train_accuracy = 0;
  double test_accuracy = 0;
  std::vector<double> epoch_loss;
};

/// Group-token embedding of every clip with gradients off: [n x d].
Tensor probe_features(const Model& model, const Dataset& data);

/// Softmax classifier trained with SGD + momentum and cosine-decayed lr.
/// Only the head is updated; features are plain values.
ProbeResult linear_probe(const Tensor& train_x, const std::vector<std::size_t>& train_y, const Tensor& test_x,
                         const std::vector<std::size_t>& test_y, std::size_t classes, const ProbeSection& cfg);

}  // namespace react
