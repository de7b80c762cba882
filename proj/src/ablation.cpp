// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/ablation.hpp"

#include "react/errors.hpp"

namespace react {

std::vector<AblationVariant> standard_variants(const ModelConfig& base) {
  const std::size_t enc = std::max<std::size_t>(base.model.encoder_layers, 1);
  const std::size_t dec = std::max<std::size_t>(base.model.decoder_layers, 1);
  return {{"features-only", 0, 0, true},
          {"+encoder", enc, 0, true},
          {"+encoder+decoder", enc, dec, true},
          {"no-actor-fusion", enc, dec, false}};
}

double AblationSummary::mean(const std::string& variant, const std::string& metric) const {
  double s = 0;
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.variant != variant) continue;
    if (metric == "merged_mca") s += r.merged_mca;
    else if (metric == "mca") s += r.mca;
    else if (metric == "keyframe_iou") s += r.keyframe_iou;
    else if (metric == "final_loss") s += r.final_loss;
    else throw ConfigError("unknown ablation metric '" + metric + "'");
    ++n;
  }
  if (n == 0) throw ContractError("no ablation runs for variant '" + variant + "'");
  return s / static_cast<double>(n);
}

AblationSummary run_ablation(const ModelConfig& base, const std::vector<AblationVariant>& variants,
                             const std::vector<std::uint64_t>& seeds, const Dataset& train, const Dataset& test,
                             const std::function<void(const AblationRun&)>& on_run) {
  AblationSummary summary;
  for (const auto& v : variants)
    for (std::uint64_t seed : seeds) {
      ModelConfig cfg = base;
      cfg.model.encoder_layers = v.encoder_layers;
      cfg.model.decoder_layers = v.decoder_layers;
      cfg.model.actor_fusion = v.actor_fusion;
      cfg.model.init_seed = seed;
      cfg.train.seed = seed;
      Model model = Model::build(cfg);
      const TrainResult tr = react::train(model, train, {});
      const EvalResult ev = evaluate(model, test, {cfg.mode(), {}});
      AblationRun run{v.name, seed, ev.merged_mca, ev.mca, ev.keyframe_iou, tr.last_eval.loss};
      summary.runs.push_back(run);
      if (on_run) on_run(run);
    }
  return summary;
}

}  // namespace react
