// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "react/backbones.hpp"
#include "react/errors.hpp"
#include "test_util.hpp"

using namespace react;
using react::testing::uniform;

TEST_CASE("sample_frames picks evenly spaced indices") {
  CHECK(sample_indices(8, 8) == iota(8));
  CHECK(sample_indices(15, 3) == std::vector<std::size_t>{0, 7, 14});
  auto idx = sample_indices(16, 8);
  REQUIRE(idx.size() == 8);
  CHECK(idx.front() == 0);
  CHECK(idx.back() == 15);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  CHECK_THROWS_AS(sample_indices(4, 5), DataError);

  std::vector<double> px(15 * 2 * 2);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<double>(i / 4);
  VideoClip clip{Tensor::from({15, 2, 2, 1}, px), 25.0, "c"};
  auto s = sample_frames(clip, 3);
  CHECK(s.frames.shape() == Shape{3, 2, 2, 1});
  CHECK(s.frames[4] == 7.0);
  CHECK(s.frames[8] == 14.0);
}

TEST_CASE("tokenize maps words through the closed vocabulary") {
  const auto& v = Vocabulary::builtin();
  CHECK(v.size() == 64);
  CHECK(v.word(0) == "<unk>");
  CHECK(tokenize("spiking", v).tokens == std::vector<std::size_t>{v.index("spiking")});
  CHECK(tokenize("left spike", v).tokens == std::vector<std::size_t>{v.index("left"), v.index("spike")});
  CHECK(tokenize("Left-SPIKE!", v).tokens == std::vector<std::size_t>{v.index("left"), v.index("spike")});
  CHECK(tokenize("zzzz", v).tokens == std::vector<std::size_t>{Vocabulary::unk});
  CHECK_THROWS_AS(tokenize("", v), DataError);
  CHECK_THROWS_AS(tokenize("  ,. ", v), DataError);
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), ConfigError);
}

TEST_CASE("visual stub shapes, linearity and locality") {
  ParamInit init(1);
  auto p = VisualStubParams::init(init, 8, 8, 1, 4, 8);
  VideoClip zero{Tensor::zeros({3, 8, 8, 1}), 25.0, "z"};
  for (double x : patch_embed(zero, p).data()) CHECK(x == 0.0);
  auto v = visual_encode(zero, p);
  CHECK(v.shape() == Shape{3, 16, 8});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < 16 * 8; ++i) CHECK(v[t * 128 + i] == p.spatial.table[i]);

  std::mt19937_64 rng(1);
  Tensor a = uniform({2, 8, 8, 1}, rng, 0, 1, false);
  auto pix = a.to_vector();
  // Perturb one pixel of frame 1, cell (row 2, col 3): rows 4..5, cols 6..7.
  pix[((1 * 8 + 5) * 8 + 6)] += 0.5;
  auto ea = visual_encode(VideoClip{a, 25.0, "a"}, p).to_vector();
  auto eb = visual_encode(VideoClip{Tensor::from({2, 8, 8, 1}, pix), 25.0, "b"}, p).to_vector();
  std::size_t changed_rows = 0, changed_row = 0;
  for (std::size_t r = 0; r < 32; ++r) {
    bool diff = false;
    for (std::size_t c = 0; c < 8; ++c) diff |= ea[r * 8 + c] != eb[r * 8 + c];
    if (diff) {
      ++changed_rows;
      changed_row = r;
    }
  }
  CHECK(changed_rows == 1);
  CHECK(changed_row == 16 + 2 * 4 + 3);

  CHECK_THROWS_AS(VisualStubParams::init(init, 10, 8, 1, 4, 8), ConfigError);
  CHECK_THROWS_AS(patch_embed(VideoClip{Tensor::zeros({1, 6, 6, 1}), 25.0, ""}, p), ConfigError);
}

TEST_CASE("text stub examples") {
  ParamInit init(2);
  auto p = TextStubParams::init(init, 64, 16, 8, 2, 32);
  TextPrompt one{{5}, "x"};
  auto y = text_encode(one, p).to_vector();
  // Degenerate length: the block sees a single row.
  std::vector<double> row(8);
  for (std::size_t c = 0; c < 8; ++c) row[c] = p.embedding[5 * 8 + c] + p.positions.table[c];
  Tensor x = Tensor::from({1, 8}, row);
  Tensor n = layer_norm(x, p.norm_attn);
  x = add(x, multi_head_attention(n, n, p.attn));
  auto want = add(x, feed_forward(layer_norm(x, p.norm_ffn), p.ffn)).to_vector();
  for (std::size_t c = 0; c < 8; ++c) CHECK(y[c] == want[c]);

  TextPrompt a{{3, 7, 9}, "a"}, b{{3, 8, 9}, "b"};
  CHECK(text_encode(a, p).to_vector() == text_encode(a, p).to_vector());
  auto ea = text_encode(a, p).to_vector(), eb = text_encode(b, p).to_vector();
  double diff = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) diff = std::max(diff, std::fabs(ea[i] - eb[i]));
  CHECK(diff > 1e-3);

  CHECK_THROWS_AS(text_encode(TextPrompt{{64}, ""}, p), DataError);
  CHECK_THROWS_AS(text_encode(TextPrompt{std::vector<std::size_t>(17, 1), ""}, p), DataError);
}

TEST_CASE("gradients reach both stubs") {
  ParamInit init(3);
  auto vp = VisualStubParams::init(init, 8, 8, 1, 2, 8);
  auto tp = TextStubParams::init(init, 64, 16, 8, 2, 32);
  std::mt19937_64 rng(3);
  VideoClip clip{uniform({2, 8, 8, 1}, rng, 0, 1, false), 25.0, "g"};
  Tape tape;
  Tensor loss = add(sum(mul(visual_encode(clip, vp), visual_encode(clip, vp))),
                    sum(mul(text_encode(TextPrompt{{1, 2}, ""}, tp), text_encode(TextPrompt{{1, 2}, ""}, tp))));
  tape.backward(loss);
  auto norm = [](const Tensor& t) {
    double s = 0.0;
    for (double g : t.grad()) s += g * g;
    return s;
  };
  CHECK(norm(vp.patch.weight) > 0.0);
  CHECK(norm(tp.embedding) > 0.0);
  CHECK(norm(tp.attn.wq.weight) > 0.0);
}
