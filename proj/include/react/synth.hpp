// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "react/annotations.hpp"
#include "react/backbones.hpp"

namespace react {

enum class MotionKind { stationary, linear, oscillate };

std::string to_string(MotionKind m);

/// Motion used for an action when a script is drawn at random. Ties each
/// action to a distinct visual pattern so labels are recoverable from pixels.
MotionKind motion_for_action(const std::string& action);

struct ActorScript {
  MotionKind motion = MotionKind::stationary;
  std::string action;
  int vx = 0, vy = 0;  // pixels per frame, linear motion only
};

struct ScenarioScript {
  std::uint64_t seed = 0;
  std::vector<ActorScript> actors;
};

/// Random script: actions drawn uniformly from the label space, motion from
/// motion_for_action, linear speed 1 or 2 px/frame in a random direction.
ScenarioScript random_script(std::uint64_t seed, std::size_t num_actors, const LabelSpace& labels);

struct RasterSpec {
  std::size_t frames = 8;
  std::size_t height = 40;
  std::size_t width = 40;
  std::size_t min_side = 6;  // rectangle sides drawn from [min_side, max_side]
  std::size_t max_side = 10;
  int amplitude = 3;  // oscillation, pixels
  int period = 4;     // oscillation, frames
};

struct SynthScene {
  VideoClip clip;  // [T x H x W x 1], background 0
  SceneAnnotation annotation;
  std::size_t reseeds = 0;  // placements rejected for overlap
};

/// Renders the script. Actor k is a rectangle of intensity (k + 1) / (n + 1).
/// Placements whose rectangles touch in any frame are redrawn.
SynthScene generate_scene(const ScenarioScript& script, const RasterSpec& raster, const LabelSpace& labels,
                          const std::string& clip_id);

/// Majority action (ties to the lower label index) and the side of the
/// majority actors' mean keyframe centre: "l-" when < 0.5, else "r-".
std::string group_rule(const std::vector<ActorTrack>& actors, std::size_t keyframe, const LabelSpace& labels);

/// Pixel-exact bounding box (normalised cx, cy, w, h) of the pixels equal
/// to `intensity` in frame t, or nullopt when there are none.
std::optional<BoxArray> fit_box(const VideoClip& clip, std::size_t t, double intensity);

struct CorpusSpec {
  std::size_t clips = 64;
  std::size_t actors = 2;
  std::uint64_t seed = 0;
  RasterSpec raster;
};

struct Corpus {
  std::vector<VideoClip> clips;
  std::vector<SceneAnnotation> annotations;
  std::size_t reseeds = 0;
};

Corpus generate_corpus(const CorpusSpec& spec, const LabelSpace& labels);

/// Writes <dir>/annotations.jsonl (native) and <dir>/clips.bin (one array per clip id).
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir, const LabelSpace& labels);

}  // namespace react
