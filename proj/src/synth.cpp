// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "react/array_io.hpp"
#include "react/errors.hpp"

namespace react {

std::string to_string(MotionKind m) {
  switch (m) {
    case MotionKind::stationary:
      return "stationary";
    case MotionKind::linear:
      return "linear";
    case MotionKind::oscillate:
      return "oscillate";
  }
  return "?";
}

MotionKind motion_for_action(const std::string& action) {
  if (action == "spiking") return MotionKind::oscillate;
  if (action == "passing") return MotionKind::linear;
  return MotionKind::stationary;
}

ScenarioScript random_script(std::uint64_t seed, std::size_t num_actors, const LabelSpace& labels) {
  if (labels.actions.empty()) throw ConfigError("label space has no actions");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, labels.actions.size() - 1);
  std::uniform_int_distribution<int> speed(1, 2), sign(0, 1);
  ScenarioScript s;
  s.seed = seed;
  for (std::size_t k = 0; k < num_actors; ++k) {
    ActorScript a;
    a.action = labels.actions[pick(rng)];
    a.motion = motion_for_action(a.action);
    const int v = speed(rng) * (sign(rng) ? 1 : -1);
    if (a.motion == MotionKind::linear) a.vx = v;
    s.actors.push_back(a);
  }
  return s;
}

namespace {

struct Rect {
  long x = 0, y = 0, w = 0, h = 0;  // top-left pixel and extent
};

bool touch(const Rect& a, const Rect& b) {
  return a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h;
}

Rect at_frame(const Rect& start, const ActorScript& s, long t, const RasterSpec& r) {
  Rect q = start;
  const long max_x = static_cast<long>(r.width) - q.w, max_y = static_cast<long>(r.height) - q.h;
  switch (s.motion) {
    case MotionKind::stationary:
      break;
    case MotionKind::linear:
      q.x = std::clamp(start.x + s.vx * t, 0L, max_x);
      q.y = std::clamp(start.y + s.vy * t, 0L, max_y);
      break;
    case MotionKind::oscillate: {
      const double phase = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(r.period);
      q.y = std::clamp(start.y + std::lround(r.amplitude * std::sin(phase)), 0L, max_y);
      break;
    }
  }
  return q;
}

BoxArray normalise(const Rect& q, const RasterSpec& r) {
  return normalize_pixel_box(static_cast<double>(q.x), static_cast<double>(q.y), static_cast<double>(q.w),
                             static_cast<double>(q.h), static_cast<double>(r.width), static_cast<double>(r.height));
}

std::string action_stem(const std::string& action) {
  static const std::map<std::string, std::string> stems = {
      {"spiking", "spike"}, {"setting", "set"}, {"passing", "pass"}};
  auto it = stems.find(action);
  return it == stems.end() ? action : it->second;
}

}  // namespace

std::string group_rule(const std::vector<ActorTrack>& actors, std::size_t keyframe, const LabelSpace& labels) {
  if (actors.empty()) throw DataError("group rule needs at least one actor");
  std::vector<std::size_t> counts(labels.actions.size(), 0);
  for (const auto& a : actors)
    for (const auto& act : a.actions) ++counts[labels.action_index(act)];
  const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  double cx = 0.0;
  std::size_t n = 0;
  for (const auto& a : actors)
    if (std::find(a.actions.begin(), a.actions.end(), labels.actions[best]) != a.actions.end()) {
      cx += a.tube.at(keyframe)[0];
      ++n;
    }
  const std::string side = (n && cx / static_cast<double>(n) < 0.5) ? "l-" : "r-";
  const std::string g = side + action_stem(labels.actions[best]);
  labels.group_index(g);  // rejects label spaces without this group
  return g;
}

SynthScene generate_scene(const ScenarioScript& script, const RasterSpec& r, const LabelSpace& labels,
                          const std::string& clip_id) {
  const std::size_t n = script.actors.size();
  if (n == 0) throw ConfigError("scenario has no actors");
  if (r.frames == 0 || r.period <= 0 || r.min_side == 0 || r.min_side > r.max_side)
    throw ConfigError("invalid raster spec");
  if (r.max_side + 2 * static_cast<std::size_t>(std::max(r.amplitude, 0)) > r.height || r.max_side > r.width)
    throw ConfigError("raster too small for the actor rectangles");
  for (const auto& a : script.actors) labels.action_index(a.action);

  std::mt19937_64 rng(script.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<long> side(static_cast<long>(r.min_side), static_cast<long>(r.max_side));
  const long T = static_cast<long>(r.frames);
  const long amp = std::max(r.amplitude, 0);

  SynthScene out;
  std::vector<Rect> start(n);
  constexpr std::size_t kMaxReseeds = 10000;
  for (;;) {
    for (std::size_t k = 0; k < n; ++k) {
      Rect& q = start[k];
      q.w = side(rng);
      q.h = side(rng);
      const long pad = script.actors[k].motion == MotionKind::oscillate ? amp : 0;
      q.x = std::uniform_int_distribution<long>(0, static_cast<long>(r.width) - q.w)(rng);
      q.y = std::uniform_int_distribution<long>(pad, static_cast<long>(r.height) - q.h - pad)(rng);
    }
    bool clear = true;
    for (long t = 0; t < T && clear; ++t)
      for (std::size_t i = 0; i < n && clear; ++i)
        for (std::size_t j = i + 1; j < n && clear; ++j)
          if (touch(at_frame(start[i], script.actors[i], t, r), at_frame(start[j], script.actors[j], t, r)))
            clear = false;
    if (clear) break;
    if (++out.reseeds > kMaxReseeds) throw DataError("could not place " + std::to_string(n) + " actors without overlap");
  }

  Tensor frames = Tensor::zeros({r.frames, r.height, r.width, 1});
  auto px = frames.mutable_data();
  SceneAnnotation& ann = out.annotation;
  ann.clip_id = clip_id;
  ann.keyframe = r.frames / 2;
  ann.prompt = "every player action";
  for (std::size_t k = 0; k < n; ++k) {
    const double intensity = static_cast<double>(k + 1) / static_cast<double>(n + 1);
    ActorTrack track;
    track.track_id = std::to_string(k);
    track.actions = {script.actors[k].action};
    for (long t = 0; t < T; ++t) {
      const Rect q = at_frame(start[k], script.actors[k], t, r);
      for (long y = q.y; y < q.y + q.h; ++y)
        for (long x = q.x; x < q.x + q.w; ++x)
          px[(static_cast<std::size_t>(t) * r.height + static_cast<std::size_t>(y)) * r.width + static_cast<std::size_t>(x)] =
              intensity;
      track.tube.push_back(normalise(q, r));
    }
    ann.actors.push_back(std::move(track));
  }
  ann.group_activity = group_rule(ann.actors, ann.keyframe, labels);
  out.clip.frames = frames;
  out.clip.clip_id = clip_id;
  return out;
}

std::optional<BoxArray> fit_box(const VideoClip& clip, std::size_t t, double intensity) {
  const std::size_t H = clip.frames.dim(1), W = clip.frames.dim(2), C = clip.frames.dim(3);
  const auto& px = clip.frames.data();
  std::size_t x0 = W, y0 = H, x1 = 0, y1 = 0;
  bool any = false;
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x)
      if (px[((t * H + y) * W + x) * C] == intensity) {
        any = true;
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x + 1);
        y1 = std::max(y1, y + 1);
      }
  if (!any) return std::nullopt;
  return normalize_pixel_box(static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0),
                             static_cast<double>(y1 - y0), static_cast<double>(W), static_cast<double>(H));
}

Corpus generate_corpus(const CorpusSpec& spec, const LabelSpace& labels) {
  Corpus c;
  std::mt19937_64 seeds(spec.seed);
  for (std::size_t i = 0; i < spec.clips; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%05zu", i);
    const ScenarioScript script = random_script(seeds(), spec.actors, labels);
    SynthScene scene = generate_scene(script, spec.raster, labels, id);
    c.reseeds += scene.reseeds;
    c.clips.push_back(std::move(scene.clip));
    c.annotations.push_back(std::move(scene.annotation));
  }
  return c;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_native(dir / "annotations.jsonl", corpus.annotations);
  ArrayContainer arrays;
  for (const auto& clip : corpus.clips) arrays.put(clip.clip_id, clip.frames);
  arrays.save((dir / "clips.bin").string());
}

Corpus load_corpus(const std::filesystem::path& dir, const LabelSpace& labels) {
  Corpus c;
  c.annotations = load_annotations(dir / "annotations.jsonl", AnnotationFormat::native, labels);
  const ArrayContainer arrays = ArrayContainer::load((dir / "clips.bin").string());
  for (const auto& a : c.annotations) {
    if (!arrays.contains(a.clip_id)) throw DataError("clips.bin has no raster for clip " + a.clip_id);
    VideoClip clip;
    clip.frames = arrays.tensor(a.clip_id);
    clip.clip_id = a.clip_id;
    if (clip.frames.rank() != 4 || clip.frames.dim(0) != a.frames())
      throw DataError("raster for clip " + a.clip_id + " does not match its annotation");
    c.clips.push_back(std::move(clip));
  }
  return c;
}

}  // namespace react
