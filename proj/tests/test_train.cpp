// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "react/checkpoint.hpp"
#include "react/config.hpp"
#include "react/errors.hpp"
#include "react/optim.hpp"
#include "react/training.hpp"

using namespace react;
namespace fs = std::filesystem;

namespace {

// Small enough to train in well under a second per step.
ModelConfig tiny_config() {
  ModelConfig c;
  c.model.frames = 4;
  c.model.height = c.model.width = 24;
  c.model.grid = 2;
  c.model.d_model = 16;
  c.model.heads = 2;
  c.model.d_ff = 32;
  c.model.encoder_layers = 1;
  c.model.decoder_layers = 1;
  c.model.queries = 2;
  c.data.clips = 6;
  c.data.actors = 2;
  c.data.train_ratio = 2.0 / 3.0;
  c.train.epochs = 3;
  c.train.batch = 2;
  c.train.warmup_epochs = 1;
  c.train.peak_lr = 1e-3;
  return c;
}

ScheduleConfig default_schedule() {
  ScheduleConfig s;  // defaults: 5e-4 peak, 5 warm-up epochs, 30 epochs, 0.04 -> 0.1
  s.steps_per_epoch = 10;
  return s;
}

ParameterSet scalar_set(Tensor& p) {
  ParameterSet set;
  set.add("w.weight", p);
  return set;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  const auto s = default_schedule();
  CHECK(lr_at(0, s) == 0.0);
  CHECK(lr_at(s.warmup_steps(), s) == 5e-4);
  CHECK(lr_at(25, s) == doctest::Approx(2.5e-4).epsilon(1e-12));
  // Cosine midpoint: half way through the post-warm-up steps.
  const std::size_t mid = s.warmup_steps() + (s.total_steps() - s.warmup_steps()) / 2;
  CHECK(std::fabs(lr_at(mid, s) - 2.5e-4) <= 1e-9);
  CHECK(lr_at(s.total_steps(), s) <= 1e-18);
  // Continuous at the junction: the step before is one warm-up increment below the peak.
  CHECK(std::fabs(lr_at(s.warmup_steps() - 1, s) - 5e-4 * 49.0 / 50.0) <= 1e-15);
  CHECK(std::fabs(lr_at(s.warmup_steps() + 1, s) - 5e-4) <= 5e-4 * (1 - std::cos(M_PI / 250)) / 2 + 1e-18);
  double prev = 1.0;
  for (std::size_t t = s.warmup_steps(); t <= s.total_steps(); ++t) {
    CHECK(lr_at(t, s) <= prev);
    prev = lr_at(t, s);
  }
  CHECK_THROWS_AS(lr_at(s.total_steps() + 1, s), ContractError);
}

TEST_CASE("weight-decay schedule") {
  const auto s = default_schedule();
  CHECK(wd_at(0, s) == 0.04);
  CHECK(wd_at(s.total_steps(), s) == 0.1);
  CHECK(wd_at(s.total_steps() / 2, s) == doctest::Approx(0.07).epsilon(1e-12));
  double prev = 0.0;
  for (std::size_t t = 0; t <= s.total_steps(); ++t) {
    CHECK(wd_at(t, s) >= prev);
    prev = wd_at(t, s);
  }
}

TEST_CASE("adam step closed forms") {
  SUBCASE("first step moves by lr against the gradient sign") {
    Tensor p = Tensor::from({1}, {0.3}, true);
    auto set = scalar_set(p);
    p.mutable_grad()[0] = 1.0;
    auto st = OptimizerState::adam();
    REQUIRE(adam_step(set, st, 0.01, 0.0));
    // m^ = 1, v^ = 1 after bias correction: update = lr / (1 + eps).
    CHECK(p.data()[0] == doctest::Approx(0.3 - 0.01 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(st.step == 1);
  }
  SUBCASE("zero gradient and zero decay leave parameters untouched") {
    Tensor p = Tensor::from({2, 2}, {1, -2, 3, 4}, true);
    auto set = scalar_set(p);
    p.mutable_grad();
    p.zero_grad();
    auto st = OptimizerState::adam();
    for (int i = 0; i < 5; ++i) REQUIRE(adam_step(set, st, 0.1, 0.0));
    CHECK(p.to_vector() == std::vector<double>{1, -2, 3, 4});
  }
  SUBCASE("decoupled decay scales weights and skips biases") {
    Tensor w = Tensor::from({1, 1}, {2.0}, true), b = Tensor::from({1}, {2.0}, true);
    ParameterSet set;
    set.add("l.weight", w);
    set.add("l.bias", b);
    auto st = OptimizerState::adam();
    REQUIRE(adam_step(set, st, 0.1, 0.5));
    CHECK(w.data()[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
    CHECK(b.data()[0] == 2.0);
  }
  SUBCASE("identical parameters with identical gradients stay identical") {
    Tensor a = Tensor::from({3}, {0.1, 0.2, 0.3}, true), b = Tensor::from({3}, {0.1, 0.2, 0.3}, true);
    ParameterSet set;
    set.add("a.weight", a);
    set.add("b.weight", b);
    auto st = OptimizerState::adam();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 50; ++i) {
      for (std::size_t k = 0; k < 3; ++k) a.mutable_grad()[k] = b.mutable_grad()[k] = g(rng);
      REQUIRE(adam_step(set, st, 0.05, 0.1));
    }
    CHECK(a.to_vector() == b.to_vector());
  }
  SUBCASE("a NaN gradient aborts the step") {
    Tensor p = Tensor::from({2}, {1.0, 2.0}, true);
    auto set = scalar_set(p);
    p.mutable_grad()[1] = std::numeric_limits<double>::quiet_NaN();
    auto st = OptimizerState::adam();
    std::string why;
    CHECK_FALSE(adam_step(set, st, 0.1, 0.0, &why));
    CHECK(why.find("w.weight") != std::string::npos);
    CHECK(p.to_vector() == std::vector<double>{1.0, 2.0});
    CHECK(st.step == 0);
  }
}

TEST_CASE("sgd momentum and gradient clipping") {
  Tensor p = Tensor::from({1}, {1.0}, true);
  auto set = scalar_set(p);
  auto st = OptimizerState::sgd(0.9);
  p.mutable_grad()[0] = 1.0;
  REQUIRE(sgd_step(set, st, 0.1));
  CHECK(p.data()[0] == doctest::Approx(0.9));
  REQUIRE(sgd_step(set, st, 0.1));  // v = 0.9 + 1
  CHECK(p.data()[0] == doctest::Approx(0.9 - 0.19));

  Tensor q = Tensor::from({2}, {0, 0}, true);
  auto qs = scalar_set(q);
  q.mutable_grad()[0] = 3;
  q.mutable_grad()[1] = 4;
  CHECK(clip_grad_norm(qs, 1.0) == doctest::Approx(5.0));
  CHECK(q.grad()[0] == doctest::Approx(0.6));
  CHECK(global_grad_norm(qs) == doctest::Approx(1.0));
  CHECK(clip_grad_norm(qs, 0.0) == doctest::Approx(1.0));  // 0 disables
}

TEST_CASE("config round trip, overrides and errors") {
  ModelConfig c = tiny_config();
  c.train.mode = "weak";
  c.train.peak_lr = 1.0 / 3.0;
  c.data.prompt = "every player action";
  std::stringstream ss;
  write_config(ss, c);
  const ModelConfig back = parse_config(ss);
  std::stringstream a, b;
  write_config(a, c);
  write_config(b, back);
  CHECK(a.str() == b.str());
  CHECK(back.train.peak_lr == 1.0 / 3.0);
  CHECK(back.mode() == SupervisionMode::weak);

  std::stringstream partial("[model]\nd_model = 32\n; comment\n# another\n[train]\nepochs = 7\n");
  const ModelConfig p = parse_config(partial);
  CHECK(p.model.d_model == 32);
  CHECK(p.train.epochs == 7);
  CHECK(p.train.peak_lr == 5e-4);
  CHECK(p.probe.epochs == 100);
  CHECK(p.probe.batch == 32);
  CHECK(p.probe.momentum == 0.9);
  CHECK(p.probe.lr == 1e-3);

  ModelConfig o;
  apply_override(o, "train.epochs = 12");
  apply_override(o, "model.actor_fusion=false");
  CHECK(o.train.epochs == 12);
  CHECK_FALSE(o.model.actor_fusion);
  CHECK_THROWS_AS(apply_override(o, "train.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(o, "train.epochs=-1"), ConfigError);

  std::stringstream unknown("[model]\ncolour = red\n");
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);
  std::stringstream bad_value("[model]\nd_model = 30\n");  // not a multiple of 4
  CHECK_THROWS_AS(parse_config(bad_value), ConfigError);
  std::stringstream bad_syntax("[model\nd_model = 32\n");
  try {
    parse_config(bad_syntax, "cfg.ini");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  std::stringstream version("[meta]\nversion = 9\n");
  CHECK_THROWS_AS(parse_config(version), ConfigError);
  for (const auto& f : config_fields()) CHECK(describe_config().find(f.section + "." + f.key) != std::string::npos);
}

TEST_CASE("checkpoint round trip reproduces the forward pass bit for bit") {
  ModelConfig c = tiny_config();
  c.train.epochs = 1;
  c.train.warmup_epochs = 0;
  auto [train_set, test_set] = synthetic_splits(c);
  Model m = Model::build(c);
  auto tr = train(m, train_set);
  const fs::path dir = fs::temp_directory_path() / "react_test_ckpt";
  fs::remove_all(dir);
  save_checkpoint(dir, m, &tr.optimizer, {CheckpointMeta::kFormat, tr.steps, 0xdeadbeefcafef00dULL, "state"});
  OptimizerState opt;
  CheckpointMeta meta;
  Model back = load_checkpoint(dir, &opt, &meta);
  CHECK(meta.step == tr.steps);
  CHECK(meta.seed == 0xdeadbeefcafef00dULL);
  CHECK(meta.rng_state == "state");
  CHECK(opt.step == tr.optimizer.step);
  CHECK(opt.first == tr.optimizer.first);
  CHECK(opt.second == tr.optimizer.second);
  NoGradScope no_grad;
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const auto prompt = m.prompt("every player action");
    auto a = m.forward(test_set.clips[i], prompt);
    auto b = back.forward(test_set.clips[i], prompt);
    CHECK(a.decoded.boxes.back().to_vector() == b.decoded.boxes.back().to_vector());
    CHECK(a.decoded.group_logits.to_vector() == b.decoded.group_logits.to_vector());
    CHECK(a.decoded.action_logits.to_vector() == b.decoded.action_logits.to_vector());
  }
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_checkpoint(dir), StateError);
}

TEST_CASE("training is deterministic for a seed and weak mode has no action loss") {
  ModelConfig c = tiny_config();
  auto [train_set, test_set] = synthetic_splits(c);
  Model a = Model::build(c), b = Model::build(c);
  const auto ra = train(a, train_set, {{}, &test_set, {}});
  const auto rb = train(b, train_set, {{}, &test_set, {}});
  CHECK(ra.log == rb.log);
  CHECK(ra.steps == 6);  // 4 clips, batch 2, 3 epochs

  c.train.seed = 1;
  Model other = Model::build(c);
  CHECK(train(other, train_set).log != ra.log);

  c.train.mode = "weak";
  Model w = Model::build(c);
  const auto rw = train(w, train_set);
  for (const auto& line : rw.log) CHECK(line.find("\"action_bce\":0.0") != std::string::npos);
}

TEST_CASE("training writes logs and checkpoints and refuses empty data") {
  ModelConfig c = tiny_config();
  c.train.epochs = 2;
  auto [train_set, test_set] = synthetic_splits(c);
  const fs::path dir = fs::temp_directory_path() / "react_test_run";
  fs::remove_all(dir);
  Model m = Model::build(c);
  const auto r = train(m, train_set, {dir, &test_set, {}});
  CHECK(fs::exists(dir / "metrics.jsonl"));
  CHECK(fs::exists(dir / "best" / "state.bin"));
  CHECK(fs::exists(dir / "final" / "state.bin"));
  CHECK(load_config(dir / "config.ini").model.d_model == 16);
  CHECK(r.log.size() == 2 * 2 + 2);  // steps + one eval per epoch
  fs::remove_all(dir);
  CHECK_THROWS_AS(train(m, Dataset{}), DataError);
}

TEST_CASE("evaluation outputs and prediction records") {
  ModelConfig c = tiny_config();
  auto [train_set, test_set] = synthetic_splits(c);
  Model m = Model::build(c);
  const auto r = evaluate(m, test_set, {SupervisionMode::full, {1, 2, 5}});
  CHECK(r.clips == 2);
  CHECK(r.predictions.size() == 2);
  CHECK(r.keyframe_iou >= 0.0);
  CHECK(r.keyframe_iou <= 1.0);
  CHECK(r.recall.count(1));
  CHECK(r.recall.count(2));
  CHECK_FALSE(r.recall.count(5));  // pool holds 4 actors
  CHECK(r.recall.at(1) <= r.recall.at(2));
  for (const auto& p : r.predictions) {
    std::size_t matched = 0;
    for (const auto& a : p.actors) matched += a.gt.has_value();
    CHECK(matched == 2);
    const auto line = prediction_record(p, m.labels);
    CHECK(line.find("\"clip_id\":\"" + p.clip_id + "\"") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);
  }
  const auto hits = retrieve(m, test_set.clips[0], "spiking");
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].score >= hits[1].score);
}

TEST_CASE("linear probe reaches separable targets and leaves the backbone frozen") {
  // Three well separated clusters in 5 dimensions.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<double> xs;
  std::vector<std::size_t> ys;
  for (std::size_t i = 0; i < 60; ++i) {
    const std::size_t y = i % 3;
    for (std::size_t k = 0; k < 5; ++k) xs.push_back((k == y ? 3.0 : 0.0) + noise(rng));
    ys.push_back(y);
  }
  const Tensor x = Tensor::from({60, 5}, xs);
  ProbeSection cfg;  // defaults: 100 epochs, batch 32, lr 1e-3, momentum 0.9
  cfg.lr = 0.05;     // the fixture has only 2 batches per epoch
  const auto r = linear_probe(x, ys, x, ys, 3, cfg);
  CHECK(r.train_accuracy == 1.0);
  CHECK(r.epoch_loss.size() == 100);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());

  ModelConfig c = tiny_config();
  auto [train_set, test_set] = synthetic_splits(c);
  Model m = Model::build(c);
  std::vector<std::vector<double>> before;
  for (const auto& [_, t] : m.params.items()) before.push_back(t.to_vector());
  const Tensor feats = probe_features(m, train_set);
  CHECK(feats.shape() == Shape{4, 16});
  std::vector<std::size_t> labels;
  for (const auto& a : train_set.annotations) labels.push_back(m.labels.group_index(a.group_activity));
  linear_probe(feats, labels, feats, labels, 6, ProbeSection{});
  std::size_t i = 0;
  for (const auto& [_, t] : m.params.items()) CHECK(t.to_vector() == before[i++]);
}
