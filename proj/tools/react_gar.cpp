// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: data generation, training, evaluation, retrieval,
// gradient checks and ablation sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "react/ablation.hpp"
#include "react/checkpoint.hpp"
#include "react/config.hpp"
#include "react/errors.hpp"
#include "react/gradsuite.hpp"
#include "react/synth.hpp"
#include "react/training.hpp"

using namespace react;
using nlohmann::json;

namespace {

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "INI config file (defaults when omitted)");
    app->add_option("--set", overrides, "override a field, e.g. --set train.epochs=5 (repeatable)");
  }
  ModelConfig resolve() const {
    ModelConfig cfg = path.empty() ? ModelConfig{} : load_config(path);
    for (const auto& o : overrides) apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
};

// Corpus on disk when a directory is given, otherwise generated from [data].
std::pair<Dataset, Dataset> datasets(const ModelConfig& cfg, const std::string& data_dir) {
  if (data_dir.empty()) return synthetic_splits(cfg);
  const Dataset all = Dataset::from_corpus(load_corpus(data_dir, cfg.label_space()));
  const Split s = make_splits(all.annotations, cfg.data.train_ratio, 1.0 - cfg.data.train_ratio, cfg.data.split_seed);
  return {all.select(s.train), all.select(s.test)};
}

std::vector<std::size_t> parse_metrics(const std::string& list, std::vector<std::string>& names) {
  std::vector<std::size_t> ks;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item.rfind("recall@", 0) == 0) {
      ks.push_back(std::stoul(item.substr(7)));
      names.push_back("r@" + item.substr(7));
    } else if (item == "mca" || item == "mpca" || item == "keyframe-iou" || item == "action-mca" || item == "loss") {
      names.push_back(item == "keyframe-iou" ? "keyframe_iou" : item == "action-mca" ? "action_mca" : item);
    } else if (item == "merged-mca") {
      names.push_back("merged_mca");
    } else if (item == "prf") {
      names.insert(names.end(), {"precision", "recall", "f1"});
    } else {
      throw ConfigError("unknown metric '" + item + "'");
    }
  }
  return ks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"react-gar: grounded group activity recognition on synthetic scenes"};
  app.footer("\n" + describe_config());
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic corpus (annotations.jsonl + clips.bin)");
  ConfigArgs gen_cfg;
  gen_cfg.attach(gen);
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a model; writes metrics.jsonl and best/ final/ checkpoints");
  ConfigArgs tr_cfg;
  tr_cfg.attach(tr);
  std::string tr_mode, tr_data, tr_out;
  std::optional<std::uint64_t> tr_seed;
  tr->add_option("--mode", tr_mode, "full or weak supervision (overrides train.mode)")
      ->check(CLI::IsMember({"full", "weak"}));
  tr->add_option("--seed", tr_seed, "seed for initialisation and training (overrides both)");
  tr->add_option("--data", tr_data, "corpus directory from gen-data (default: generate from [data])");
  tr->add_option("--out", tr_out, "run directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  std::string ev_ckpt, ev_data, ev_metrics = "mca,merged-mca,prf,recall@1,recall@5,recall@10", ev_pred, ev_mode;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint directory")->required();
  ev->add_option("--data", ev_data, "corpus directory (default: regenerate from the checkpoint config)");
  ev->add_option("--metrics", ev_metrics,
                 "comma list of mca, merged-mca, mpca, prf, keyframe-iou, action-mca, loss, recall@K");
  ev->add_option("--predictions", ev_pred, "write one prediction record per clip to this file");
  ev->add_option("--mode", ev_mode, "supervision view for the loss columns")->check(CLI::IsMember({"full", "weak"}));

  // retrieve
  auto* rt = app.add_subcommand("retrieve", "rank each clip's actors for a text prompt");
  std::string rt_ckpt, rt_data, rt_prompt;
  std::size_t rt_top = 0;
  rt->add_option("--checkpoint", rt_ckpt, "checkpoint directory")->required();
  rt->add_option("--data", rt_data, "corpus directory (default: regenerate from the checkpoint config)");
  rt->add_option("--prompt", rt_prompt, "action text, e.g. \"spiking\"")->required();
  rt->add_option("--top", rt_top, "actors per clip to print (0: all)");

  // probe
  auto* pr = app.add_subcommand("probe", "linear probe on the frozen group-token features");
  std::string pr_ckpt, pr_data;
  pr->add_option("--checkpoint", pr_ckpt, "checkpoint directory")->required();
  pr->add_option("--data", pr_data, "corpus directory (default: regenerate from the checkpoint config)");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every op and block");
  double gc_tol = 1e-4;
  std::uint64_t gc_seed = 0;
  gc->add_option("--tolerance", gc_tol, "maximum relative error");
  gc->add_option("--seed", gc_seed, "input seed");

  // ablate
  auto* ab = app.add_subcommand("ablate", "encoder / decoder / actor-fusion on-off sweep");
  ConfigArgs ab_cfg;
  ab_cfg.attach(ab);
  std::string ab_data;
  std::vector<std::uint64_t> ab_seeds{0, 1, 2};
  ab->add_option("--data", ab_data, "corpus directory (default: generate from [data])");
  ab->add_option("--seeds", ab_seeds, "seeds to average over");

  // config
  auto* cf = app.add_subcommand("config", "print a fully documented config file");
  ConfigArgs cf_cfg;
  cf_cfg.attach(cf);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ModelConfig cfg = gen_cfg.resolve();
      CorpusSpec spec;
      spec.clips = cfg.data.clips;
      spec.actors = cfg.data.actors;
      spec.seed = cfg.data.corpus_seed;
      spec.raster.frames = cfg.model.frames;
      spec.raster.height = cfg.model.height;
      spec.raster.width = cfg.model.width;
      const Corpus c = generate_corpus(spec, cfg.label_space());
      save_corpus(c, gen_out);
      std::cout << "wrote " << c.clips.size() << " clips to " << gen_out << " (" << c.reseeds << " re-seeded placements)\n";
    } else if (*tr) {
      ModelConfig cfg = tr_cfg.resolve();
      if (!tr_mode.empty()) cfg.train.mode = tr_mode;
      if (tr_seed) cfg.train.seed = cfg.model.init_seed = *tr_seed;
      auto [train_set, test_set] = datasets(cfg, tr_data);
      Model model = Model::build(cfg);
      TrainOptions opt;
      opt.out_dir = tr_out;
      opt.eval = test_set.size() ? &test_set : nullptr;
      opt.on_record = [](const std::string& line) {
        if (line.find("\"type\":\"eval\"") != std::string::npos) std::cout << line << '\n';
      };
      const TrainResult r = train(model, train_set, opt);
      std::cout << "trained " << r.steps << " steps; best " << cfg.train.select_metric << " = " << r.best_metric
                << " at step " << r.best_step << '\n';
    } else if (*ev) {
      const Model model = load_checkpoint(ev_ckpt);
      std::vector<std::string> names;
      EvalOptions opt;
      opt.mode = ev_mode.empty() ? model.config.mode() : parse_mode(ev_mode);
      opt.recall_k = parse_metrics(ev_metrics, names);
      const Dataset test = datasets(model.config, ev_data).second;
      const EvalResult r = evaluate(model, test, opt);
      json out = {{"clips", r.clips}};
      const auto s = r.scalars();
      for (const auto& n : names) {
        auto it = s.find(n);
        out[n] = it == s.end() ? json(nullptr) : json(it->second);
      }
      std::cout << out.dump(2) << '\n';
      if (!ev_pred.empty()) {
        std::ofstream os(ev_pred);
        for (const auto& p : r.predictions) os << prediction_record(p, model.labels) << '\n';
      }
    } else if (*rt) {
      const Model model = load_checkpoint(rt_ckpt);
      const auto [train_set, test_set] = datasets(model.config, rt_data);
      const Dataset& pool = test_set.size() ? test_set : train_set;
      for (std::size_t c = 0; c < pool.size(); ++c) {
        auto hits = retrieve(model, pool.clips[c], rt_prompt);
        if (rt_top && hits.size() > rt_top) hits.resize(rt_top);
        json ranked = json::array();
        for (const auto& h : hits) ranked.push_back({{"query", h.query}, {"score", h.score}, {"box", h.keyframe_box}});
        std::cout << json{{"clip_id", pool.annotations[c].clip_id}, {"prompt", rt_prompt}, {"actors", ranked}}.dump()
                  << '\n';
      }
    } else if (*pr) {
      const Model model = load_checkpoint(pr_ckpt);
      const auto [train_set, test_set] = datasets(model.config, pr_data);
      auto labels_of = [&](const Dataset& d) {
        std::vector<std::size_t> y;
        for (const auto& a : d.annotations) y.push_back(model.labels.group_index(a.group_activity));
        return y;
      };
      const Tensor test_x = test_set.size() ? probe_features(model, test_set) : Tensor();
      const ProbeResult r = linear_probe(probe_features(model, train_set), labels_of(train_set), test_x,
                                         labels_of(test_set), model.labels.groups.size(), model.config.probe);
      std::cout << json{{"train_accuracy", r.train_accuracy}, {"test_accuracy", r.test_accuracy},
                        {"final_loss", r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back()}}
                       .dump(2)
                << '\n';
    } else if (*gc) {
      bool ok = true;
      for (const auto& e : run_gradient_suite(gc_seed)) {
        const bool pass = e.report.max_rel_error <= gc_tol && e.report.compared > 0;
        ok = ok && pass;
        std::printf("%-4s %-58s max_rel=%.3e compared=%zu excluded=%zu\n", pass ? "ok" : "FAIL", e.name.c_str(),
                    e.report.max_rel_error, e.report.compared, e.report.excluded);
      }
      return ok ? 0 : 1;
    } else if (*ab) {
      const ModelConfig cfg = ab_cfg.resolve();
      const auto [train_set, test_set] = datasets(cfg, ab_data);
      const auto variants = standard_variants(cfg);
      // With no held-out split the variants are scored on the clips they fit.
      const Dataset& scored = test_set.size() ? test_set : train_set;
      const auto summary = run_ablation(cfg, variants, ab_seeds, train_set, scored, [](const AblationRun& r) {
        std::cout << json{{"variant", r.variant}, {"seed", r.seed}, {"merged_mca", r.merged_mca}, {"mca", r.mca},
                          {"keyframe_iou", r.keyframe_iou}}
                         .dump()
                  << '\n';
      });
      std::printf("\n%-20s %12s %12s\n", "variant", "merged_mca", "keyframe_iou");
      for (const auto& v : variants)
        std::printf("%-20s %12.4f %12.4f\n", v.name.c_str(), summary.mean(v.name, "merged_mca"),
                    summary.mean(v.name, "keyframe_iou"));
    } else if (*cf) {
      write_config(std::cout, cf_cfg.resolve());
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
