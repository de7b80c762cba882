// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "react/errors.hpp"

namespace react {

using nlohmann::json;

LabelSpace LabelSpace::synthetic() {
  LabelSpace s;
  s.actions = {"spiking", "setting", "passing"};
  s.groups = {"l-spike", "l-set", "l-pass", "r-spike", "r-set", "r-pass"};
  s.merge = {{"l-set", "l-pass"}, {"r-set", "r-pass"}};
  return s;
}

namespace {

std::size_t find_label(const std::vector<std::string>& v, const std::string& x, const char* kind) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it == v.end()) throw DataError(std::string("unknown ") + kind + " label '" + x + "'");
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

std::size_t LabelSpace::action_index(const std::string& a) const { return find_label(actions, a, "action"); }
std::size_t LabelSpace::group_index(const std::string& g) const { return find_label(groups, g, "group"); }
bool LabelSpace::has_action(const std::string& a) const { return std::find(actions.begin(), actions.end(), a) != actions.end(); }
bool LabelSpace::has_group(const std::string& g) const { return std::find(groups.begin(), groups.end(), g) != groups.end(); }

MergeMap LabelSpace::merge_map() const {
  MergeMap m;
  for (const auto& g : groups) {
    auto it = merge.find(g);
    m.push_back(group_index(it == merge.end() ? g : it->second));
  }
  return m;
}

void validate(const SceneAnnotation& a, const LabelSpace& labels) {
  if (a.clip_id.empty()) throw DataError("annotation without a clip id");
  if (!labels.has_group(a.group_activity))
    throw DataError("clip " + a.clip_id + ": unknown group label '" + a.group_activity + "'");
  std::set<std::string> ids;
  const std::size_t frames = a.frames();
  for (const auto& actor : a.actors) {
    if (!ids.insert(actor.track_id).second) throw DataError("clip " + a.clip_id + ": duplicate track " + actor.track_id);
    if (actor.tube.size() != frames || frames == 0)
      throw DataError("clip " + a.clip_id + ": track " + actor.track_id + " has a tube of the wrong length");
    for (const auto& b : actor.tube) {
      for (double v : b)
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("clip " + a.clip_id + ": box coordinate outside [0, 1]");
      if (!(b[2] > 0.0 && b[3] > 0.0)) throw DataError("clip " + a.clip_id + ": box with no extent");
      constexpr double tol = 1e-9;
      if (b[0] - b[2] / 2 < -tol || b[0] + b[2] / 2 > 1 + tol || b[1] - b[3] / 2 < -tol || b[1] + b[3] / 2 > 1 + tol)
        throw DataError("clip " + a.clip_id + ": box extends past the frame");
    }
    for (const auto& act : actor.actions)
      if (!labels.has_action(act)) throw DataError("clip " + a.clip_id + ": unknown action label '" + act + "'");
  }
  if (!a.actors.empty() && a.keyframe >= frames) throw DataError("clip " + a.clip_id + ": keyframe outside the clip");
  std::set<std::string> grouped;
  for (const auto& g : a.social_groups)
    for (const auto& m : g.members) {
      if (!ids.count(m)) throw DataError("clip " + a.clip_id + ": social group names unknown track " + m);
      if (!grouped.insert(m).second) throw DataError("clip " + a.clip_id + ": track " + m + " is in two social groups");
    }
}

// ---- native ---------------------------------------------------------------

namespace {

json to_json(const SceneAnnotation& a) {
  json actors = json::array();
  for (const auto& t : a.actors) actors.push_back({{"track_id", t.track_id}, {"actions", t.actions}, {"boxes", t.tube}});
  json groups = json::array();
  for (const auto& g : a.social_groups) groups.push_back({{"members", g.members}, {"activity", g.activity}});
  json j = {{"clip_id", a.clip_id}, {"keyframe", a.keyframe}, {"group", a.group_activity},
            {"actors", actors},     {"social_groups", groups}, {"weak", a.weak}};
  if (a.prompt) j["prompt"] = *a.prompt;
  return j;
}

SceneAnnotation from_json(const json& j) {
  SceneAnnotation a;
  a.clip_id = j.at("clip_id").get<std::string>();
  a.keyframe = j.at("keyframe").get<std::size_t>();
  a.group_activity = j.at("group").get<std::string>();
  for (const auto& t : j.at("actors"))
    a.actors.push_back({t.at("track_id").get<std::string>(), t.at("boxes").get<std::vector<BoxArray>>(),
                        t.at("actions").get<std::vector<std::string>>()});
  if (j.contains("social_groups"))
    for (const auto& g : j.at("social_groups"))
      a.social_groups.push_back({g.at("members").get<std::vector<std::string>>(), g.at("activity").get<std::string>()});
  if (j.contains("prompt")) a.prompt = j.at("prompt").get<std::string>();
  a.weak = j.value("weak", false);
  return a;
}

}  // namespace

void write_native(std::ostream& os, const std::vector<SceneAnnotation>& anns) {
  os << kNativeHeader << '\n';
  for (const auto& a : anns) os << to_json(a).dump() << '\n';
}

void save_native(const std::filesystem::path& path, const std::vector<SceneAnnotation>& anns) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  write_native(os, anns);
}

AnnotationFormat parse_format(const std::string& name) {
  if (name == "native") return AnnotationFormat::native;
  if (name == "volleyball") return AnnotationFormat::volleyball;
  if (name == "jrdbpar") return AnnotationFormat::jrdbpar;
  throw ConfigError("unknown annotation format '" + name + "' (native, volleyball, jrdbpar)");
}

BoxArray normalize_pixel_box(double x, double y, double w, double h, double frame_w, double frame_h) {
  return {(x + w / 2.0) / frame_w, (y + h / 2.0) / frame_h, w / frame_w, h / frame_h};
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double number(const std::string& tok, const std::string& source, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line, std::string("expected a number for ") + what + ", got '" + tok + "'");
  }
}

std::string normalize_label(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Re-throws content errors with the line number attached.
template <typename F>
void at_line(const std::string& source, std::size_t line, F&& f) {
  try {
    f();
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw DataError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::vector<SceneAnnotation> load_native(std::istream& in, const std::string& source, const LabelSpace& labels) {
  std::vector<SceneAnnotation> out;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header) {
      if (line.empty()) continue;
      if (line != kNativeHeader) throw ParseError(source, n, "expected header '" + std::string(kNativeHeader) + "'");
      header = true;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    SceneAnnotation a;
    try {
      a = from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(source, n, std::string("malformed record: ") + e.what());
    }
    at_line(source, n, [&] { validate(a, labels); });
    out.push_back(std::move(a));
  }
  return out;
}

// <frame>.jpg <group> then repeated <x> <y> <w> <h> <action>.
std::vector<SceneAnnotation> load_volleyball(std::istream& in, const std::string& source, const LabelSpace& labels,
                                             const LoadOptions& opt) {
  std::vector<SceneAnnotation> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 2 || (tok.size() - 2) % 5 != 0)
      throw ParseError(source, n, "expected '<frame> <group> (<x> <y> <w> <h> <action>)*', got " +
                                      std::to_string(tok.size()) + " fields");
    SceneAnnotation a;
    a.clip_id = tok[0].substr(0, tok[0].find('.'));
    a.group_activity = normalize_label(tok[1]);
    for (std::size_t i = 2, k = 0; i < tok.size(); i += 5, ++k) {
      const double x = number(tok[i], source, n, "x"), y = number(tok[i + 1], source, n, "y");
      const double w = number(tok[i + 2], source, n, "w"), h = number(tok[i + 3], source, n, "h");
      a.actors.push_back({std::to_string(k), {normalize_pixel_box(x, y, w, h, opt.frame_width, opt.frame_height)},
                          {normalize_label(tok[i + 4])}});
    }
    at_line(source, n, [&] { validate(a, labels); });
    out.push_back(std::move(a));
  }
  return out;
}

// <sequence> <frame> <track> <x> <y> <w> <h> <social_group> <social_activity> <actions,...> <global_activity>
std::vector<SceneAnnotation> load_jrdbpar(std::istream& in, const std::string& source, const LabelSpace& labels,
                                          const LoadOptions& opt) {
  std::vector<SceneAnnotation> out;
  std::map<std::string, std::size_t> clip_index;
  std::map<std::string, std::size_t> group_index;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line[0] == '#') continue;
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 11) throw ParseError(source, n, "expected 11 fields, got " + std::to_string(tok.size()));
    const double frame = number(tok[1], source, n, "frame");
    if (frame < 0 || frame != std::floor(frame)) throw ParseError(source, n, "frame id must be a non-negative integer");
    const auto f = static_cast<std::size_t>(frame);
    const double x = number(tok[3], source, n, "x"), y = number(tok[4], source, n, "y");
    const double w = number(tok[5], source, n, "w"), h = number(tok[6], source, n, "h");
    if (f % opt.keyframe_stride != 0) continue;  // only keyframes are annotated
    const std::string clip = tok[0] + "/" + tok[1];
    auto [it, fresh] = clip_index.emplace(clip, out.size());
    if (fresh) {
      SceneAnnotation a;
      a.clip_id = clip;
      a.group_activity = normalize_label(tok[10]);
      out.push_back(std::move(a));
    }
    SceneAnnotation& a = out[it->second];
    if (a.group_activity != normalize_label(tok[10]))
      throw DataError(source + ":" + std::to_string(n) + ": clip " + clip + " has conflicting global activities");
    std::vector<std::string> acts;
    for (const auto& s : split_on(tok[9], ',')) acts.push_back(normalize_label(s));
    a.actors.push_back({tok[2], {normalize_pixel_box(x, y, w, h, opt.frame_width, opt.frame_height)}, acts});
    // Social groups are keyed by (clip, group id); members keep plain track ids.
    auto [g, new_group] = group_index.emplace(clip + "#" + tok[7], a.social_groups.size());
    if (new_group) a.social_groups.push_back({{}, normalize_label(tok[8])});
    SocialGroup& sg = a.social_groups[g->second];
    if (sg.activity != normalize_label(tok[8]))
      throw DataError(source + ":" + std::to_string(n) + ": social group " + tok[7] + " has conflicting activities");
    sg.members.push_back(tok[2]);
    at_line(source, n, [&] { validate(a, labels); });
  }
  return out;
}

}  // namespace

std::vector<SceneAnnotation> load_annotations(std::istream& in, const std::string& source, AnnotationFormat format,
                                              const LabelSpace& labels, const LoadOptions& opt) {
  switch (format) {
    case AnnotationFormat::native:
      return load_native(in, source, labels);
    case AnnotationFormat::volleyball:
      return load_volleyball(in, source, labels, opt);
    case AnnotationFormat::jrdbpar:
      return load_jrdbpar(in, source, labels, opt);
  }
  throw ConfigError("unknown annotation format");
}

std::vector<SceneAnnotation> load_annotations(const std::filesystem::path& path, AnnotationFormat format,
                                              const LabelSpace& labels, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return load_annotations(in, path.string(), format, labels, opt);
}

Split make_splits(const std::vector<SceneAnnotation>& anns, double train_ratio, double test_ratio, std::uint64_t seed) {
  if (train_ratio < 0.0 || test_ratio < 0.0 || std::fabs(train_ratio + test_ratio - 1.0) > 1e-9)
    throw ConfigError("split ratios must be non-negative and sum to 1");
  std::vector<std::string> ids;
  for (const auto& a : anns) ids.push_back(a.clip_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DataError("duplicate clip id in split input");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto cut = static_cast<std::size_t>(std::lround(train_ratio * static_cast<double>(ids.size())));
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cut));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(cut), ids.end());
  return s;
}

SceneAnnotation weak_supervision_view(const SceneAnnotation& a) {
  SceneAnnotation w = a;
  for (auto& actor : w.actors) actor.actions.clear();
  w.weak = true;
  return w;
}

ClipTarget make_target(const SceneAnnotation& a, const std::vector<std::size_t>& indices, const LabelSpace& labels) {
  if (a.actors.empty()) throw DataError("clip " + a.clip_id + " has no annotated actors");
  const std::size_t t = indices.size();
  std::vector<double> boxes;
  for (const auto& actor : a.actors)
    for (std::size_t i : indices) {
      if (i >= actor.tube.size()) throw DataError("clip " + a.clip_id + ": sampled frame outside the annotation");
      boxes.insert(boxes.end(), actor.tube[i].begin(), actor.tube[i].end());
    }
  ClipTarget target;
  target.boxes = Tensor::from({a.actors.size(), t, 4}, std::move(boxes));
  for (const auto& actor : a.actors) {
    std::vector<std::size_t> acts;
    for (const auto& s : actor.actions) acts.push_back(labels.action_index(s));
    target.actions.push_back(std::move(acts));
  }
  target.group = labels.group_index(a.group_activity);
  // Keyframe: the sampled position closest to the annotated frame.
  std::size_t best = 0;
  for (std::size_t k = 1; k < t; ++k)
    if (std::llabs(static_cast<long long>(indices[k]) - static_cast<long long>(a.keyframe)) <
        std::llabs(static_cast<long long>(indices[best]) - static_cast<long long>(a.keyframe)))
      best = k;
  target.keyframe = best;
  target.weak = a.weak;
  return target;
}

}  // namespace react
