// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "react/checkpoint.hpp"
#include "react/errors.hpp"
#include "react/losses.hpp"

namespace react {

using nlohmann::json;

Dataset Dataset::from_corpus(const Corpus& corpus) { return {corpus.clips, corpus.annotations}; }

Dataset Dataset::select(const std::vector<std::string>& ids) const {
  Dataset out;
  for (const auto& id : ids) {
    auto it = std::find_if(annotations.begin(), annotations.end(), [&](const SceneAnnotation& a) { return a.clip_id == id; });
    if (it == annotations.end()) throw DataError("no clip with id " + id);
    const auto i = static_cast<std::size_t>(it - annotations.begin());
    out.clips.push_back(clips[i]);
    out.annotations.push_back(annotations[i]);
  }
  return out;
}

std::pair<Dataset, Dataset> synthetic_splits(const ModelConfig& cfg) {
  CorpusSpec spec;
  spec.clips = cfg.data.clips;
  spec.actors = cfg.data.actors;
  spec.seed = cfg.data.corpus_seed;
  spec.raster.frames = cfg.model.frames;
  spec.raster.height = cfg.model.height;
  spec.raster.width = cfg.model.width;
  const Dataset all = Dataset::from_corpus(generate_corpus(spec, cfg.label_space()));
  const Split s = make_splits(all.annotations, cfg.data.train_ratio, 1.0 - cfg.data.train_ratio, cfg.data.split_seed);
  return {all.select(s.train), all.select(s.test)};
}

ClipTarget clip_target(const Model& model, const SceneAnnotation& a, SupervisionMode mode) {
  const auto idx = model.frame_indices(a.frames());
  return make_target(mode == SupervisionMode::weak ? weak_supervision_view(a) : a, idx, model.labels);
}

namespace {

TextPrompt clip_prompt(const Model& model, const SceneAnnotation& a) {
  return model.prompt(a.prompt.value_or(model.config.data.prompt));
}

BoxArray box_row(const Tensor& boxes, std::size_t i) {
  const auto d = boxes.data();
  return {d[i * 4], d[i * 4 + 1], d[i * 4 + 2], d[i * 4 + 3]};
}

std::vector<double> row(const Tensor& x, std::size_t i) {
  const std::size_t w = x.dim(x.rank() - 1);
  const auto d = x.data();
  return {d.begin() + static_cast<std::ptrdiff_t>(i * w), d.begin() + static_cast<std::ptrdiff_t>((i + 1) * w)};
}

std::vector<double> pooled_text(const ModelOutput& out) { return mean_axis(out.shared.text(), 0).to_vector(); }

double sigmoid_of(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double EvalResult::metric(const std::string& name) const {
  const auto s = scalars();
  auto it = s.find(name);
  if (it == s.end()) throw ConfigError("unknown metric '" + name + "'");
  return it->second;
}

std::map<std::string, double> EvalResult::scalars() const {
  std::map<std::string, double> s = {{"mca", mca},
                                     {"merged_mca", merged_mca},
                                     {"mpca", mpca},
                                     {"action_mca", action_mca},
                                     {"precision", prf.precision},
                                     {"recall", prf.recall},
                                     {"f1", prf.f1},
                                     {"keyframe_iou", keyframe_iou},
                                     {"loss", loss},
                                     {"l1", l1},
                                     {"giou", giou},
                                     {"group_ce", group_ce},
                                     {"action_bce", action_bce}};
  for (const auto& [k, v] : recall) s["r@" + std::to_string(k)] = v;
  return s;
}

EvalResult evaluate(const Model& model, const Dataset& data, const EvalOptions& opt) {
  NoGradScope no_grad;
  const LabelSpace& labels = model.labels;
  const LossWeights w = model.config.loss_weights();
  EvalResult r;
  r.clips = data.size();
  if (data.size() == 0) return r;
  std::vector<std::size_t> group_pred, group_gt, action_pred, action_gt;
  std::vector<std::vector<std::size_t>> pred_sets, gt_sets;
  double iou_sum = 0;
  std::size_t iou_n = 0;
  std::vector<std::vector<double>> pool;                   // matched actor embeddings
  std::vector<std::pair<std::size_t, std::size_t>> owner;  // (clip, gt actor) per pool entry

  for (std::size_t c = 0; c < data.size(); ++c) {
    const auto& a = data.annotations[c];
    const ClipTarget target = clip_target(model, a, opt.mode);
    const ModelOutput out = model.forward(data.clips[c], clip_prompt(model, a));
    const DecoderOutput& d = out.decoded;
    const LossTerms terms = total_objective(d, target, w);
    r.loss += terms.total.item();
    r.l1 += terms.l1;
    r.giou += terms.giou;
    r.group_ce += terms.group_ce;
    r.action_bce += terms.action_bce;

    ClipPrediction p;
    p.clip_id = a.clip_id;
    const auto g = d.group_logits.to_vector();
    p.group = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
    double z = 0;
    for (double v : g) z += std::exp(v - g[p.group]);
    p.group_confidence = 1.0 / z;
    group_pred.push_back(p.group);
    group_gt.push_back(target.group);

    const std::size_t n = d.boxes.back().dim(0), m = target.boxes.dim(0);
    const Tensor kf = frame_slice(d.boxes.back(), target.keyframe);
    const Tensor gt_kf = frame_slice(target.boxes, target.keyframe);
    const MatchResult match = hungarian_match(match_cost(kf, d.action_logits, gt_kf, {}, w, true), m, n);
    const std::size_t A = labels.actions.size();
    for (std::size_t q = 0; q < n; ++q) {
      ActorPrediction ap;
      ap.query = q;
      ap.keyframe_box = box_row(kf, q);
      const auto logits = row(d.action_logits, q);
      for (double l : logits) ap.action_scores.push_back(sigmoid_of(l));
      for (std::size_t k = 0; k < A; ++k)
        if (ap.action_scores[k] > 0.5) ap.actions.push_back(k);
      if (ap.actions.empty())
        ap.actions.push_back(static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin()));
      p.actors.push_back(std::move(ap));
    }
    for (std::size_t i = 0; i < m; ++i) {
      ActorPrediction& ap = p.actors[match.assignment[i]];
      ap.gt = i;
      const BoxArray gb = box_row(gt_kf, i);
      ap.iou = iou(Box{ap.keyframe_box[0], ap.keyframe_box[1], ap.keyframe_box[2], ap.keyframe_box[3]},
                   Box{gb[0], gb[1], gb[2], gb[3]});
      iou_sum += ap.iou;
      ++iou_n;
      std::vector<std::size_t> gt_actions;
      for (const auto& s : a.actors[i].actions) gt_actions.push_back(labels.action_index(s));
      if (!gt_actions.empty()) {
        const auto& sc = ap.action_scores;
        action_pred.push_back(static_cast<std::size_t>(std::max_element(sc.begin(), sc.end()) - sc.begin()));
        action_gt.push_back(gt_actions.front());
      }
      pred_sets.push_back(ap.actions);
      gt_sets.push_back(gt_actions);
      pool.push_back(row(d.embeddings.back(), match.assignment[i]));
      owner.emplace_back(c, i);
    }
    r.predictions.push_back(std::move(p));
  }
  const double nc = static_cast<double>(data.size());
  r.loss /= nc;
  r.l1 /= nc;
  r.giou /= nc;
  r.group_ce /= nc;
  r.action_bce /= nc;
  const MergeMap merge = labels.merge_map();
  r.mca = mca(group_pred, group_gt);
  r.merged_mca = mca(group_pred, group_gt, &merge);
  r.mpca = mpca(group_pred, group_gt);
  r.action_mca = action_gt.empty() ? 0.0 : mca(action_pred, action_gt);
  if (std::any_of(gt_sets.begin(), gt_sets.end(), [](const auto& s) { return !s.empty(); }))
    r.prf = multilabel_prf(pred_sets, gt_sets);
  r.keyframe_iou = iou_n ? iou_sum / static_cast<double>(iou_n) : 0.0;

  if (!opt.recall_k.empty()) {
    // One query per annotated actor with an action: the clip re-read with that
    // action as the prompt; candidates are all matched actors in the pool.
    std::vector<std::vector<double>> queries;
    std::vector<std::size_t> gt;
    std::map<std::pair<std::size_t, std::string>, std::vector<double>> cache;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      const auto [c, i] = owner[k];
      const auto& acts = data.annotations[c].actors[i].actions;
      if (acts.empty()) continue;
      auto key = std::make_pair(c, acts.front());
      auto it = cache.find(key);
      if (it == cache.end())
        it = cache.emplace(key, pooled_text(model.forward(data.clips[c], model.prompt(acts.front())))).first;
      queries.push_back(it->second);
      gt.push_back(k);
    }
    if (!queries.empty()) {
      const auto ranks = retrieval_ranks(queries, pool, gt);
      for (std::size_t k : opt.recall_k)
        if (k <= pool.size()) r.recall[k] = recall_from_ranks(ranks, k, pool.size());
    }
  }
  return r;
}

std::vector<RetrievalHit> retrieve(const Model& model, const VideoClip& clip, const std::string& prompt) {
  NoGradScope no_grad;
  const ModelOutput out = model.forward(clip, model.prompt(prompt));
  const auto q = pooled_text(out);
  const Tensor& emb = out.decoded.embeddings.back();
  const Tensor kf = frame_slice(out.decoded.boxes.back(), keyframe_of(model.config.model.frames));
  const std::size_t n = emb.dim(0);
  std::vector<RetrievalHit> hits;
  const double nq = std::sqrt(std::inner_product(q.begin(), q.end(), q.begin(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = row(emb, i);
    const double den = nq * std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0));
    hits.push_back({i, den == 0 ? 0.0 : std::inner_product(q.begin(), q.end(), e.begin(), 0.0) / den, box_row(kf, i)});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) { return a.score > b.score; });
  return hits;
}

std::string prediction_record(const ClipPrediction& p, const LabelSpace& labels) {
  json actors = json::array();
  for (const auto& a : p.actors) {
    std::vector<std::string> names;
    for (std::size_t k : a.actions) names.push_back(labels.actions.at(k));
    json j = {{"query", a.query}, {"labels", names}, {"scores", a.action_scores}, {"box", a.keyframe_box}};
    if (a.gt) {
      j["gt"] = *a.gt;
      j["iou"] = a.iou;
    }
    actors.push_back(j);
  }
  return json{{"clip_id", p.clip_id},
              {"group", labels.groups.at(p.group)},
              {"confidence", p.group_confidence},
              {"actors", actors}}
      .dump();
}

ScheduleConfig schedule_for(const ModelConfig& cfg, std::size_t train_clips) {
  ScheduleConfig s;
  s.peak_lr = cfg.train.peak_lr;
  s.warmup_epochs = cfg.train.warmup_epochs;
  s.total_epochs = cfg.train.epochs;
  const std::size_t b = std::min(cfg.train.batch, std::max<std::size_t>(train_clips, 1));
  s.steps_per_epoch = (train_clips + b - 1) / b;
  s.wd_start = cfg.train.wd_start;
  s.wd_end = cfg.train.wd_end;
  return s;
}

namespace {

bool lower_is_better(const std::string& metric) {
  return metric == "loss" || metric == "l1" || metric == "giou" || metric == "group_ce" || metric == "action_bce";
}

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

}  // namespace

TrainResult train(Model& model, const Dataset& data, const TrainOptions& opt) {
  const ModelConfig& cfg = model.config;
  const SupervisionMode mode = cfg.mode();
  const std::size_t n = data.size();
  if (n == 0) throw DataError("training set is empty");
  const ScheduleConfig sched = schedule_for(cfg, n);
  const std::size_t batch = std::min(cfg.train.batch, n);
  std::size_t budget = sched.total_steps();
  if (cfg.train.max_steps > 0) budget = std::min(budget, cfg.train.max_steps);
  const LossWeights w = cfg.loss_weights();
  const Dataset& eval_set = opt.eval ? *opt.eval : data;
  const std::string select = cfg.train.select_metric;
  const bool lower = lower_is_better(select);

  std::vector<ClipTarget> targets;
  std::vector<TextPrompt> prompts;
  std::vector<Tensor> gt_keyframes;
  for (const auto& a : data.annotations) {
    targets.push_back(clip_target(model, a, mode));
    prompts.push_back(clip_prompt(model, a));
    gt_keyframes.push_back(frame_slice(targets.back().boxes, targets.back().keyframe));
  }

  std::ofstream log_file;
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    log_file.open(opt.out_dir / "metrics.jsonl");
    save_config(opt.out_dir / "config.ini", cfg);
  }
  TrainResult result;
  result.optimizer = OptimizerState::adam();
  auto record = [&](const json& j) {
    std::string line = j.dump();
    if (log_file) log_file << line << '\n' << std::flush;
    if (opt.on_record) opt.on_record(line);
    result.log.push_back(std::move(line));
  };

  std::mt19937_64 shuffle_rng(cfg.train.seed);
  std::mt19937_64 dropout_rng(cfg.train.seed ^ 0x5bd1e995ULL);
  const RunContext ctx{true, &dropout_rng};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  bool have_best = false;

  for (std::size_t epoch = 0; epoch < sched.total_epochs && step < budget; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < n && step < budget; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      model.params.zero_grad();
      double l1 = 0, giou = 0, ce = 0, bce = 0, loss = 0;
      {
        Tape tape;
        Tensor sum;
        for (std::size_t k = start; k < stop; ++k) {
          const std::size_t i = order[k];
          const ModelOutput out = model.forward(data.clips[i], prompts[i], ctx, &gt_keyframes[i]);
          const LossTerms terms = total_objective(out.decoded, targets[i], w);
          sum = sum.defined() ? add(sum, terms.total) : terms.total;
          l1 += terms.l1;
          giou += terms.giou;
          ce += terms.group_ce;
          bce += terms.action_bce;
        }
        const double inv = 1.0 / static_cast<double>(stop - start);
        const Tensor total = sum * inv;
        loss = total.item();
        l1 *= inv;
        giou *= inv;
        ce *= inv;
        bce *= inv;
        if (!std::isfinite(loss))
          throw StateError("loss is not finite at step " + std::to_string(step) + "; training aborted");
        tape.backward(total);
      }
      const double norm = clip_grad_norm(model.params, cfg.train.clip_norm);
      const double lr = lr_at(step, sched), wd = wd_at(step, sched);
      std::string why;
      if (!adam_step(model.params, result.optimizer, lr, wd, &why))
        throw StateError(why + " at step " + std::to_string(step) + "; training aborted");
      ++step;
      record({{"type", "step"}, {"step", step},     {"epoch", epoch},    {"lr", lr},
              {"wd", wd},       {"loss", loss},     {"l1", l1},          {"giou", giou},
              {"group_ce", ce}, {"action_bce", bce}, {"grad_norm", norm}});
    }
    const bool last = epoch + 1 == sched.total_epochs || step >= budget;
    if ((epoch + 1) % cfg.train.eval_every == 0 || last) {
      result.last_eval = evaluate(model, eval_set, {mode, {}});
      json j = {{"type", "eval"}, {"step", step}, {"epoch", epoch}};
      for (const auto& [k, v] : result.last_eval.scalars()) j[k] = v;
      record(j);
      const double value = result.last_eval.metric(select);
      if (!have_best || (lower ? value < result.best_metric : value > result.best_metric)) {
        have_best = true;
        result.best_metric = value;
        result.best_step = step;
        if (!opt.out_dir.empty())
          save_checkpoint(opt.out_dir / "best", model, &result.optimizer,
                          {CheckpointMeta::kFormat, step, cfg.train.seed, rng_text(shuffle_rng)});
      }
    }
  }
  result.steps = step;
  if (!opt.out_dir.empty())
    save_checkpoint(opt.out_dir / "final", model, &result.optimizer,
                    {CheckpointMeta::kFormat, step, cfg.train.seed, rng_text(shuffle_rng)});
  return result;
}

Tensor probe_features(const Model& model, const Dataset& data) {
  NoGradScope no_grad;
  std::vector<Tensor> rows;
  for (std::size_t c = 0; c < data.size(); ++c)
    rows.push_back(model.forward(data.clips[c], clip_prompt(model, data.annotations[c])).decoded.group_embedding);
  if (rows.empty()) throw DataError("no clips to extract features from");
  return concat(rows, 0).detach();
}

namespace {

double accuracy(const Tensor& x, const std::vector<std::size_t>& y, const Linear& head) {
  if (y.empty()) return 0.0;
  NoGradScope no_grad;
  const Tensor logits = linear(x, head);
  const std::size_t c = logits.dim(1);
  std::size_t right = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = logits.data().subspan(i * c, c);
    right += static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin()) == y[i];
  }
  return static_cast<double>(right) / static_cast<double>(y.size());
}

}  // namespace

ProbeResult linear_probe(const Tensor& train_x, const std::vector<std::size_t>& train_y, const Tensor& test_x,
                         const std::vector<std::size_t>& test_y, std::size_t classes, const ProbeSection& cfg) {
  if (train_x.rank() != 2 || train_x.dim(0) != train_y.size() || train_y.empty())
    throw ContractError("probe needs [n x d] features with one label per row");
  const std::size_t n = train_y.size(), d = train_x.dim(1);
  ParamInit init(cfg.seed);
  ProbeResult r;
  r.head = Linear::init(init, d, classes);
  ParameterSet params;
  r.head.collect(params, "probe");
  OptimizerState state = OptimizerState::sgd(cfg.momentum);
  const std::size_t batch = std::min(cfg.batch, n);
  const std::size_t per_epoch = (n + batch - 1) / batch, total = cfg.epochs * per_epoch;
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Tensor x = train_x.detach();
  std::size_t step = 0;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t s = 0; s < n; s += batch) {
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(s),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + batch)));
      std::vector<std::size_t> y;
      for (std::size_t i : idx) y.push_back(train_y[i]);
      params.zero_grad();
      Tape tape;
      const Tensor loss = cross_entropy(linear(index_select(x, idx), r.head), y);
      tape.backward(loss);
      epoch_loss += loss.item() * static_cast<double>(idx.size());
      const double lr = cfg.lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(total)));
      std::string why;
      if (!sgd_step(params, state, lr, &why)) throw StateError(why);
      ++step;
    }
    r.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  r.train_accuracy = accuracy(x, train_y, r.head);
  r.test_accuracy = test_y.empty() ? 0.0 : accuracy(test_x.detach(), test_y, r.head);
  return r;
}

}  // namespace react
