// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "react/annotations.hpp"
#include "react/errors.hpp"
#include "react/losses.hpp"
#include "react/synth.hpp"

using namespace react;
namespace fs = std::filesystem;

namespace {

const LabelSpace kLabels = LabelSpace::synthetic();

SceneAnnotation sample_annotation() {
  SceneAnnotation a;
  a.clip_id = "clip-a";
  a.keyframe = 1;
  a.group_activity = "r-pass";
  a.actors = {{"7", {{0.25, 0.5, 0.1, 0.2}, {0.3, 0.5, 0.1, 0.2}, {0.35, 0.5, 0.1, 0.2}}, {"passing"}},
              {"9", {{0.7, 0.4, 0.1, 0.1}, {0.7, 0.4, 0.1, 0.1}, {0.7, 0.4, 0.1, 0.1}}, {"setting", "passing"}}};
  a.social_groups = {{{"7", "9"}, "r-pass"}};
  a.prompt = "every player action";
  return a;
}

std::vector<SceneAnnotation> ten_clips() {
  std::vector<SceneAnnotation> v;
  for (int i = 0; i < 10; ++i) {
    auto a = sample_annotation();
    a.clip_id = "c" + std::to_string(i);
    v.push_back(a);
  }
  return v;
}

}  // namespace

TEST_CASE("native format round trip") {
  std::vector<SceneAnnotation> anns = {sample_annotation(), weak_supervision_view(sample_annotation())};
  anns[1].clip_id = "clip-b";
  anns[1].prompt.reset();
  anns[1].actors[0].tube[2] = {1.0 / 3.0, 0.1 + 0.2, 0.2, 2.0 / 7.0};  // non-terminating decimals survive
  std::stringstream ss;
  write_native(ss, anns);
  auto back = load_annotations(ss, "mem", AnnotationFormat::native, kLabels);
  CHECK(back == anns);

  const fs::path dir = fs::temp_directory_path() / "react_test_native";
  fs::create_directories(dir);
  save_native(dir / "a.jsonl", anns);
  CHECK(load_annotations(dir / "a.jsonl", AnnotationFormat::native, kLabels) == anns);
  fs::remove_all(dir);
}

TEST_CASE("volleyball pixel boxes are normalised") {
  std::stringstream ss("9575.jpg l_spike 100 200 50 80 spiking 600 300 40 60 setting\n");
  auto anns = load_annotations(ss, "mem", AnnotationFormat::volleyball, kLabels);
  REQUIRE(anns.size() == 1);
  const auto& a = anns[0];
  CHECK(a.clip_id == "9575");
  CHECK(a.group_activity == "l-spike");
  REQUIRE(a.actors.size() == 2);
  // cx = (x + w/2)/W etc., worked by hand.
  const BoxArray want = {125.0 / 1280.0, 240.0 / 720.0, 50.0 / 1280.0, 80.0 / 720.0};
  for (int i = 0; i < 4; ++i) CHECK(a.actors[0].tube[0][i] == doctest::Approx(want[i]).epsilon(1e-15));
  CHECK(a.actors[0].tube[0][0] == doctest::Approx(0.09765625));
  CHECK(a.actors[0].tube[0][1] == doctest::Approx(1.0 / 3.0));
  CHECK(a.actors[1].actions == std::vector<std::string>{"setting"});

  LoadOptions small;
  small.frame_width = 200;
  small.frame_height = 400;
  std::stringstream s2("1.jpg r_pass 100 200 50 80 passing\n");
  auto b = load_annotations(s2, "mem", AnnotationFormat::volleyball, kLabels, small);
  CHECK(b[0].actors[0].tube[0] == BoxArray{0.625, 0.6, 0.25, 0.2});
}

TEST_CASE("jrdbpar keeps only keyframes and groups tracks") {
  std::stringstream ss(
      "# seq frame track x y w h group activity actions global\n"
      "s1 0 1 100 100 40 40 g1 l-pass passing l-pass\n"
      "s1 0 2 300 100 40 40 g1 l-pass passing,setting l-pass\n"
      "s1 0 3 900 100 40 40 g2 r-set setting l-pass\n"
      "s1 7 1 100 100 40 40 g1 l-pass passing l-pass\n"
      "s1 15 1 110 100 40 40 g1 l-pass passing r-spike\n");
  auto anns = load_annotations(ss, "mem", AnnotationFormat::jrdbpar, kLabels);
  REQUIRE(anns.size() == 2);
  CHECK(anns[0].clip_id == "s1/0");
  CHECK(anns[0].actors.size() == 3);
  REQUIRE(anns[0].social_groups.size() == 2);
  CHECK(anns[0].social_groups[0].members == std::vector<std::string>{"1", "2"});
  CHECK(anns[0].social_groups[1].activity == "r-set");
  CHECK(anns[0].actors[1].actions == std::vector<std::string>{"passing", "setting"});
  CHECK(anns[1].clip_id == "s1/15");
  CHECK(anns[1].group_activity == "r-spike");
}

TEST_CASE("empty files load as empty lists") {
  for (auto f : {AnnotationFormat::native, AnnotationFormat::volleyball, AnnotationFormat::jrdbpar}) {
    std::stringstream ss("");
    CHECK(load_annotations(ss, "mem", f, kLabels).empty());
  }
  std::stringstream header_only(std::string(kNativeHeader) + "\n");
  CHECK(load_annotations(header_only, "mem", AnnotationFormat::native, kLabels).empty());
  CHECK_THROWS_AS(parse_format("csv"), ConfigError);
}

TEST_CASE("error corpus is rejected with line numbers") {
  const fs::path dir = fs::path(REACT_TEST_FIXTURES) / "annotation_errors";
  std::ifstream manifest(dir / "MANIFEST");
  REQUIRE(manifest);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(manifest, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string file, format;
    std::size_t want = 0;
    is >> file >> format >> want;
    CAPTURE(file);
    ++seen;
    bool rejected = false;
    try {
      load_annotations(dir / file, parse_format(format), kLabels);
    } catch (const ParseError& e) {
      rejected = true;
      CHECK(e.line() == want);
    } catch (const DataError& e) {
      rejected = true;
      CHECK(std::string(e.what()).find(":" + std::to_string(want) + ": ") != std::string::npos);
    }
    CHECK(rejected);
  }
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().filename() != "MANIFEST";
  CHECK(seen == files);
  CHECK(seen >= 10);
}

TEST_CASE("splits") {
  auto anns = ten_clips();
  auto s = make_splits(anns, 0.8, 0.2, 42);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  for (const auto& id : s.test) CHECK(std::find(s.train.begin(), s.train.end(), id) == s.train.end());
  auto again = make_splits(anns, 0.8, 0.2, 42);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  std::reverse(anns.begin(), anns.end());  // input order does not matter
  CHECK(make_splits(anns, 0.8, 0.2, 42).test == s.test);

  auto all = make_splits(anns, 1.0, 0.0, 3);
  CHECK(all.train.size() == 10);
  CHECK(all.test.empty());
  CHECK_THROWS_AS(make_splits(anns, 0.7, 0.2, 1), ConfigError);
  CHECK_THROWS_AS(make_splits(anns, 1.2, -0.2, 1), ConfigError);
}

TEST_CASE("weak supervision view") {
  const auto a = sample_annotation();
  const auto w = weak_supervision_view(a);
  CHECK(w.weak);
  CHECK(weak_supervision_view(w) == w);
  auto restored = w;
  restored.weak = false;
  for (std::size_t i = 0; i < a.actors.size(); ++i) {
    CHECK(w.actors[i].actions.empty());
    restored.actors[i].actions = a.actors[i].actions;
  }
  CHECK(restored == a);

  // The objective on a weak target carries no action term at all.
  const auto target = make_target(w, {0, 1, 2}, kLabels);
  CHECK(target.weak);
  CHECK(target.keyframe == 1);
  DecoderOutput out;
  out.boxes = {Tensor::from({2, 3, 4}, std::vector<double>(24, 0.3), true)};
  out.action_logits = Tensor::from({2, 3}, {4.0, -2.0, 1.0, 0.5, 0.5, -3.0}, true);
  out.group_logits = Tensor::from({6}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, true);
  auto terms = total_objective(out, target, LossWeights{});
  CHECK(terms.action_bce == 0.0);
  auto full = total_objective(out, make_target(a, {0, 1, 2}, kLabels), LossWeights{});
  CHECK(full.action_bce > 0.0);
}

TEST_CASE("make_target picks the nearest sampled keyframe") {
  auto a = sample_annotation();
  auto t = make_target(a, {0, 2}, kLabels);
  CHECK(t.boxes.shape() == Shape{2, 2, 4});
  CHECK(t.boxes.data()[4] == 0.35);
  CHECK(t.keyframe == 0);  // frames 0 and 2 tie; the earlier wins
  CHECK(t.group == kLabels.group_index("r-pass"));
  CHECK(t.actions[1] == std::vector<std::size_t>{1, 2});
  CHECK_THROWS_AS(make_target(a, {0, 3}, kLabels), DataError);
  CHECK(kLabels.merge_map() == MergeMap{0, 2, 2, 3, 5, 5});
}

TEST_CASE("synthetic motions") {
  RasterSpec r;
  r.frames = 8;
  ScenarioScript still{11, {{MotionKind::stationary, "setting"}}};
  auto s = generate_scene(still, r, kLabels, "still");
  for (const auto& b : s.annotation.actors[0].tube) CHECK(b == s.annotation.actors[0].tube[0]);

  // 4 px/frame on a 40 px raster is 0.1 per frame in cx until the border clamps it.
  ScenarioScript walk{5, {{MotionKind::linear, "passing", 4, 0}}};
  auto w = generate_scene(walk, r, kLabels, "walk");
  const auto& tube = w.annotation.actors[0].tube;
  const double half_w = tube[0][2] / 2;
  for (std::size_t t = 1; t < tube.size(); ++t) {
    const double unclamped = tube[0][0] + 0.1 * static_cast<double>(t);
    const double expect = std::min(unclamped, 1.0 - half_w);
    CHECK(tube[t][0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(tube[t][1] == tube[0][1]);
  }

  ScenarioScript bob{9, {{MotionKind::oscillate, "spiking"}}};
  auto o = generate_scene(bob, r, kLabels, "bob");
  const auto& ot = o.annotation.actors[0].tube;
  // sin at quarter periods: 0, +amp, 0, -amp (pixels).
  const double px = 1.0 / 40.0;
  CHECK(ot[1][1] - ot[0][1] == doctest::Approx(3 * px));
  CHECK(ot[2][1] == doctest::Approx(ot[0][1]));
  CHECK(ot[3][1] - ot[0][1] == doctest::Approx(-3 * px));
  CHECK(ot[4][1] == doctest::Approx(ot[0][1]));
}

TEST_CASE("synthetic scenes are deterministic and pixel exact") {
  RasterSpec r;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto script = random_script(seed, 1 + seed % 4, kLabels);
    auto a = generate_scene(script, r, kLabels, "x");
    auto b = generate_scene(script, r, kLabels, "x");
    CHECK(a.annotation == b.annotation);
    CHECK(std::equal(a.clip.frames.data().begin(), a.clip.frames.data().end(), b.clip.frames.data().begin()));
    CHECK(a.reseeds == b.reseeds);
    const std::size_t n = script.actors.size();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t t = 0; t < r.frames; ++t) {
        auto fit = fit_box(a.clip, t, static_cast<double>(k + 1) / static_cast<double>(n + 1));
        REQUIRE(fit.has_value());
        const auto& g = a.annotation.actors[k].tube[t];
        const Box pb{(*fit)[0], (*fit)[1], (*fit)[2], (*fit)[3]}, gb{g[0], g[1], g[2], g[3]};
        CHECK(iou(pb, gb) == doctest::Approx(1.0).epsilon(1e-12));
      }
    CHECK_NOTHROW(validate(a.annotation, kLabels));
  }
}

TEST_CASE("group rule") {
  auto actor = [](double cx, const char* act) { return ActorTrack{"a", {{cx, 0.5, 0.1, 0.1}}, {act}}; };
  CHECK(group_rule({actor(0.2, "spiking"), actor(0.3, "spiking"), actor(0.9, "setting")}, 0, kLabels) == "l-spike");
  CHECK(group_rule({actor(0.2, "passing"), actor(0.9, "passing"), actor(0.95, "passing")}, 0, kLabels) == "r-pass");
  // One of each: the lowest action index (spiking) wins; its actor sits on the right.
  CHECK(group_rule({actor(0.1, "passing"), actor(0.7, "spiking"), actor(0.2, "setting")}, 0, kLabels) == "r-spike");
  CHECK(group_rule({actor(0.5, "setting")}, 0, kLabels) == "r-set");
}

TEST_CASE("overlapping placements are redrawn") {
  RasterSpec r;
  r.height = r.width = 24;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = generate_scene(random_script(seed, 4, kLabels), r, kLabels, "busy");
    total += s.reseeds;
  }
  CHECK(total > 0);
  r.height = r.width = 17;  // at most 2 x 2 rectangles of side >= 6 fit
  CHECK_THROWS_AS(generate_scene(random_script(0, 5, kLabels), r, kLabels, "full"), DataError);
}

TEST_CASE("corpus save and load") {
  CorpusSpec spec;
  spec.clips = 5;
  spec.actors = 3;
  spec.seed = 17;
  auto c = generate_corpus(spec, kLabels);
  const fs::path dir = fs::temp_directory_path() / "react_test_corpus";
  save_corpus(c, dir);
  auto back = load_corpus(dir, kLabels);
  CHECK(back.annotations == c.annotations);
  REQUIRE(back.clips.size() == 5);
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(std::equal(back.clips[i].frames.data().begin(), back.clips[i].frames.data().end(),
                     c.clips[i].frames.data().begin()));
  fs::remove_all(dir);
}
