// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "react/losses.hpp"
#include "react/metrics.hpp"

namespace react {

using BoxArray = std::array<double, 4>;  // cx, cy, w, h in [0, 1]

struct ActorTrack {
  std::string track_id;
  std::vector<BoxArray> tube;  // one box per clip frame
  std::vector<std::string> actions;

  bool operator==(const ActorTrack&) const = default;
};

struct SocialGroup {
  std::vector<std::string> members;  // track ids
  std::string activity;

  bool operator==(const SocialGroup&) const = default;
};

struct SceneAnnotation {
  std::string clip_id;
  std::size_t keyframe = 0;  // frame index within the full clip
  std::vector<ActorTrack> actors;
  std::string group_activity;
  std::vector<SocialGroup> social_groups;
  std::optional<std::string> prompt;
  bool weak = false;  // action labels withheld

  std::size_t frames() const { return actors.empty() ? 0 : actors.front().tube.size(); }
  bool operator==(const SceneAnnotation&) const = default;
};

/// Closed action / group-activity vocabularies plus the merge map used for
/// Merged MCA and the action -> group table used by the group vote.
struct LabelSpace {
  std::vector<std::string> actions;
  std::vector<std::string> groups;
  std::map<std::string, std::string> merge;  // group -> merged group; identity when absent

  /// spiking/setting/passing and {l,r}-{spike,set,pass}, set merged into pass.
  static LabelSpace synthetic();
  std::size_t action_index(const std::string& a) const;
  std::size_t group_index(const std::string& g) const;
  bool has_action(const std::string& a) const;
  bool has_group(const std::string& g) const;
  MergeMap merge_map() const;
};

/// Checks boxes, label membership and social-group membership; throws DataError.
void validate(const SceneAnnotation& a, const LabelSpace& labels);

// ---- native format --------------------------------------------------------
//
// Line 1: "# react-annotations v1". Each further non-empty line is one JSON
// object: {"clip_id", "keyframe", "group", "actors": [{"track_id",
// "actions", "boxes": [[cx, cy, w, h], ...]}], "social_groups": [{"members",
// "activity"}], "prompt" (optional), "weak"}.

inline constexpr const char* kNativeHeader = "# react-annotations v1";

void write_native(std::ostream& os, const std::vector<SceneAnnotation>& anns);
void save_native(const std::filesystem::path& path, const std::vector<SceneAnnotation>& anns);

enum class AnnotationFormat { native, volleyball, jrdbpar };

AnnotationFormat parse_format(const std::string& name);

struct LoadOptions {
  double frame_width = 1280.0;  // pixel formats
  double frame_height = 720.0;
  std::size_t keyframe_stride = 15;  // jrdbpar-style
};

/// Parses one annotation file. Malformed lines raise ParseError with the
/// line number; valid lines with bad content raise DataError (also
/// line-numbered). An empty file yields an empty list.
std::vector<SceneAnnotation> load_annotations(std::istream& in, const std::string& source, AnnotationFormat format,
                                              const LabelSpace& labels, const LoadOptions& opt = {});
std::vector<SceneAnnotation> load_annotations(const std::filesystem::path& path, AnnotationFormat format,
                                              const LabelSpace& labels, const LoadOptions& opt = {});

/// Pixel (x, y, w, h) with top-left origin -> normalised (cx, cy, w, h).
BoxArray normalize_pixel_box(double x, double y, double w, double h, double frame_w, double frame_h);

// ---- splits and views -----------------------------------------------------

struct Split {
  std::vector<std::string> train, test;  // clip ids
};

/// Seeded shuffle of the clip ids (sorted first), cut at round(train_ratio * n).
Split make_splits(const std::vector<SceneAnnotation>& anns, double train_ratio, double test_ratio, std::uint64_t seed);

/// Drops every action label and marks the annotation weak.
SceneAnnotation weak_supervision_view(const SceneAnnotation& a);

/// Supervision for a clip sampled at `indices` of the full clip.
ClipTarget make_target(const SceneAnnotation& a, const std::vector<std::size_t>& indices, const LabelSpace& labels);

}  // namespace react
