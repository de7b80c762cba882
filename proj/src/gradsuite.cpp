// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/gradsuite.hpp"

#include <functional>
#include <random>

#include "react/backbones.hpp"
#include "react/decoder.hpp"
#include "react/encoder.hpp"
#include "react/fusion.hpp"
#include "react/losses.hpp"
#include "react/nn.hpp"
#include "react/ops.hpp"

namespace react {

namespace {

constexpr std::size_t kD = 8, kT = 2, kCells = 4, kText = 3, kN = 2, kHeads = 2;

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(Shape shape, double lo = -1.0, double hi = 1.0, bool grad = true) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(shape_numel(shape));
    for (auto& x : v) x = u(rng_);
    return Tensor::from(std::move(shape), std::move(v), grad);
  }

  // Boxes with centres in [0.3, 0.7] and sides in [0.1, 0.3].
  Tensor boxes(Shape lead) {
    Shape s = lead;
    s.push_back(4);
    std::vector<double> v(shape_numel(s));
    std::uniform_real_distribution<double> c(0.3, 0.7), side(0.1, 0.3);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 4) < 2 ? c(rng_) : side(rng_);
    return Tensor::from(s, v, true);
  }

  void jitter(const ParameterSet& set, double scale = 0.2) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (const auto& [_, t] : set.items()) {
      Tensor h = t;
      for (double& x : h.mutable_data()) x += u(rng_);
    }
  }

  static std::vector<Tensor> leaves(const ParameterSet& set, std::vector<Tensor> extra = {}) {
    for (const auto& [_, t] : set.items()) extra.push_back(t);
    return extra;
  }

  // Scalar = sum(op() * w) with w fixed, so every output entry matters.
  void weighted(const std::string& name, const std::function<Tensor()>& op, std::vector<Tensor> inputs) {
    Tensor w;
    {
      NoGradScope no_grad;
      w = uniform(op().shape(), -1.0, 1.0, false);
    }
    scalar(name, [&] { return sum(mul(op(), w)); }, std::move(inputs));
  }

  void scalar(const std::string& name, const std::function<Tensor()>& f, std::vector<Tensor> inputs) {
    entries.push_back({name, grad_check(f, std::move(inputs))});
  }

  std::mt19937_64& rng() { return rng_; }
  std::vector<SuiteEntry> entries;

 private:
  std::mt19937_64 rng_;
};

void op_checks(Suite& s) {
  Tensor a = s.uniform({3, 4}), b = s.uniform({4, 2});
  s.weighted("op matmul", [&] { return matmul(a, b); }, {a, b});

  Tensor x = s.uniform({2, 3, 4}), y = s.uniform({3, 4}), z = s.uniform({2, 1, 4}, 1.5, 2.5);
  s.weighted("op add/sub/mul/div with broadcast", [&] { return div(sub(mul(add(x, y), y), x), z); }, {x, y, z});

  Tensor p = s.uniform({3, 4}), q = s.uniform({3, 4});
  s.weighted("op minimum/maximum", [&] { return add(minimum(p, q), maximum(p, q) * 2.0); }, {p, q});

  Tensor u = s.uniform({3, 5}), pos = s.uniform({3, 5}, 0.1, 0.9);
  s.weighted("op relu/gelu/sigmoid/tanh/sin/cos/exp/abs/clamp/affine",
             [&] {
               return relu(u) + gelu(u) + sigmoid(u) + tanh(u) + sin(u) + cos(u) + exp(u) + abs(u) +
                      clamp(u, -0.5, 0.5) + affine(u, 3.0, 1.0) - u;
             },
             {u});
  s.weighted("op log/inverse_sigmoid", [&] { return log(pos) + inverse_sigmoid(pos); }, {pos});

  Tensor r = s.uniform({2, 3, 4});
  s.scalar("op sum/mean/sum_axis/mean_axis",
           [&] { return sum(sum_axis(r, 1)) * 0.3 + sum(mul(mean_axis(r, 2), mean_axis(r, 2))) + mean(r); }, {r});
  for (std::size_t axis = 0; axis < 3; ++axis)
    s.weighted("op softmax axis " + std::to_string(axis), [&] { return softmax(r, axis); }, {r});

  Tensor ln = s.uniform({3, kD}), g = s.uniform({kD}), be = s.uniform({kD});
  s.weighted("op layer_norm", [&] { return layer_norm(ln, g, be); }, {ln, g, be});

  Tensor c1 = s.uniform({2, 3, 4}), c2 = s.uniform({2, 3, 4});
  s.weighted("op reshape/permute/slice/concat/index_select/tile_leading",
             [&] {
               Tensor c = permute(concat({c1, c2}, 1), {2, 0, 1});
               Tensor sl = reshape(slice(c, 2, 1, 5), {4, 8});
               return concat({sl, reshape(index_select(c1, {1, 0, 1}), {4, 9}),
                              reshape(tile_leading(c2, 2), {4, 12})},
                             1);
             },
             {c1, c2});

  Tensor aq = s.uniform({2, 3, kD}), ak = s.uniform({2, 5, kD}), av = s.uniform({2, 5, kD});
  s.weighted("op scaled_dot_attention", [&] { return scaled_dot_attention(aq, ak, av, kHeads); }, {aq, ak, av});

  Tensor cx = s.uniform({kT + 3, 3}), ck = s.uniform({3, 3, 2}), cb = s.uniform({2});
  s.weighted("op conv1d", [&] { return conv1d(cx, ck, cb); }, {cx, ck, cb});

  Tensor logits = s.uniform({4, 5}, -3, 3);
  std::vector<double> bits{1, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 1, 0, 1};
  s.scalar("op cross_entropy/bce_with_logits",
           [&] { return cross_entropy(logits, {0, 4, 2, 2}) + bce_with_logits(logits, bits); }, {logits});
}

void block_checks(Suite& s) {
  {
    ParamInit init(1);
    auto ffn = FeedForwardParams::init(init, kD, 4 * kD);
    auto lin = Linear::init(init, kD, kD);
    ParameterSet set;
    ffn.collect(set, "ffn");
    lin.collect(set, "lin");
    s.jitter(set);
    Tensor x = s.uniform({3, kD});
    s.weighted("block linear + feed-forward", [&] { return feed_forward(linear(x, lin), ffn); }, Suite::leaves(set, {x}));
  }
  {
    ParamInit init(2);
    auto att = AttentionParams::init(init, kD, kHeads);
    ParameterSet set;
    att.collect(set, "att");
    s.jitter(set);
    Tensor q = s.uniform({3, kD}), kv = s.uniform({5, kD});
    s.weighted("block multi-head attention", [&] { return multi_head_attention(q, kv, att); },
               Suite::leaves(set, {q, kv}));
  }
  {
    ParamInit init(3);
    auto vis = VisualStubParams::init(init, 4, 4, 2, 2, kD);  // 2 x 2 grid: HW = 4
    ParameterSet set;
    vis.collect(set, "visual");
    s.jitter(set);
    VideoClip clip{s.uniform({kT, 4, 4, 2}, 0, 1, false), 25.0, "toy"};
    s.weighted("block visual stub", [&] { return visual_encode(clip, vis); }, Suite::leaves(set));
  }
  {
    ParamInit init(4);
    auto text = TextStubParams::init(init, 12, 8, kD, kHeads, 4 * kD);
    ParameterSet set;
    text.collect(set, "text");
    s.jitter(set);
    TextPrompt prompt{{3, 7, 1}, "toy"};
    s.weighted("block text stub", [&] { return text_encode(prompt, text); }, Suite::leaves(set));
  }
  {
    ParamInit init(5);
    auto enc = EncoderParams::init(init, 1, kD, kHeads, 4 * kD, kT, 0.0);
    ParameterSet set;
    enc.collect(set, "encoder");
    s.jitter(set);
    Tensor v = s.uniform({kT, kCells, kD}), t = s.uniform({kText, kD});
    s.weighted("block vision-language encoder", [&] { return encode(v, t, enc).rows; }, Suite::leaves(set, {v, t}));
  }
  {
    ParamInit init(6);
    auto fus = FusionParams::init(init, kN, kD);
    ParameterSet set;
    fus.collect(set, "fusion");
    s.jitter(set);
    Tensor bx = s.boxes({kN}), t = s.uniform({kText, kD});
    s.weighted("block actor fusion", [&] { return fuse(bx, t, fus); }, Suite::leaves(set, {bx, t}));
  }
  {
    ParamInit init(7);
    auto dec = DecoderParams::init(init, 2, kN, kD, kHeads, 4 * kD, kT, 3, 6, 0.0);
    dec.detach_feedback = false;  // compare against the full derivative
    ParameterSet set;
    dec.collect(set, "decoder");
    s.jitter(set);
    RowLayout lay{kT, kCells, kText};
    SharedRepresentation rep{s.uniform({lay.total(), kD}), lay};
    Tensor wb = s.uniform({kN, kT, 4}, -1, 1, false), wa = s.uniform({kN, 3}, -1, 1, false);
    Tensor wg = s.uniform({6}, -1, 1, false);
    s.scalar("block action decoder",
             [&] {
               auto out = decode(rep, dec);
               Tensor acc = add(sum(mul(out.action_logits, wa)), sum(mul(out.group_logits, wg)));
               for (const auto& b : out.boxes) acc = add(acc, sum(mul(b, wb)));
               return acc;
             },
             Suite::leaves(set, {rep.rows}));
  }
  {
    Tensor pred = s.boxes({kN, kT}), gt = s.boxes({kN, kT});
    gt = gt.detach();
    s.scalar("block gIoU + L1 losses", [&] { return add(giou_loss(pred, gt), l1_loss(pred, gt)); }, {pred});
  }
  {
    DecoderOutput out;
    out.boxes = {s.boxes({kN + 1, kT}), s.boxes({kN + 1, kT})};
    out.action_logits = s.uniform({kN + 1, 3}, -2, 2);
    out.group_logits = s.uniform({6}, -2, 2);
    ClipTarget target;
    target.boxes = s.boxes({kN, kT}).detach();
    target.actions = {{0}, {1, 2}};
    target.group = 4;
    target.keyframe = kT / 2;
    s.scalar("block total objective",
             [&] { return total_objective(out, target, LossWeights{}).total; },
             {out.boxes[0], out.boxes[1], out.action_logits, out.group_logits});
  }
}

}  // namespace

std::vector<SuiteEntry> run_gradient_suite(std::uint64_t seed) {
  Suite s(seed);
  op_checks(s);
  block_checks(s);
  return std::move(s.entries);
}

}  // namespace react
