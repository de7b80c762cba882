// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "react/array_io.hpp"
#include "react/errors.hpp"

namespace react {

namespace {

void put_values(ArrayContainer& c, const std::string& name, const std::vector<double>& v) {
  c.put(NamedArray{name, DType::f64, {v.size()}, v});
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Model& model, const OptimizerState* optimizer,
                     const CheckpointMeta& meta) {
  std::filesystem::create_directories(dir);
  save_config(dir / "config.ini", model.config);
  ArrayContainer c;
  put_values(c, "meta/format", {static_cast<double>(meta.format)});
  put_values(c, "meta/step", {static_cast<double>(meta.step)});
  // Split so 64-bit seeds survive the double encoding.
  put_values(c, "meta/seed", {static_cast<double>(meta.seed >> 32), static_cast<double>(meta.seed & 0xffffffffULL)});
  for (const auto& [name, t] : model.params.items()) c.put("param/" + name, t);
  if (optimizer) {
    const bool adam = optimizer->kind == OptimizerKind::adam;
    put_values(c, "opt/header",
               {adam ? 0.0 : 1.0, static_cast<double>(optimizer->step), optimizer->beta1, optimizer->beta2,
                optimizer->eps, optimizer->momentum});
    const auto& items = model.params.items();
    for (std::size_t i = 0; i < optimizer->first.size() && i < items.size(); ++i)
      put_values(c, "opt/first/" + items[i].first, optimizer->first[i]);
    for (std::size_t i = 0; i < optimizer->second.size() && i < items.size(); ++i)
      put_values(c, "opt/second/" + items[i].first, optimizer->second[i]);
  }
  // Write to a temporary name first so an interrupted save never replaces a good checkpoint.
  const auto tmp = dir / "state.bin.tmp";
  c.save(tmp.string());
  std::filesystem::rename(tmp, dir / "state.bin");
  std::ofstream(dir / "rng.txt") << meta.rng_state << '\n';
}

Model load_checkpoint(const std::filesystem::path& dir, OptimizerState* optimizer, CheckpointMeta* meta) {
  if (!std::filesystem::exists(dir / "state.bin")) throw StateError("no checkpoint at " + dir.string());
  Model model = Model::build(load_config(dir / "config.ini"));
  const ArrayContainer c = ArrayContainer::load((dir / "state.bin").string());
  const auto format = static_cast<std::uint32_t>(c.get("meta/format").values.at(0));
  if (format != CheckpointMeta::kFormat)
    throw StateError("checkpoint format " + std::to_string(format) + " is not supported");
  for (const auto& [name, t] : model.params.items()) {
    const std::string key = "param/" + name;
    if (!c.contains(key)) throw StateError("checkpoint lacks parameter " + name);
    const NamedArray& a = c.get(key);
    if (a.shape != t.shape()) throw StateError("checkpoint parameter " + name + " has the wrong shape");
    Tensor h = t;
    std::copy(a.values.begin(), a.values.end(), h.mutable_data().begin());
  }
  if (meta) {
    meta->format = format;
    meta->step = static_cast<std::size_t>(c.get("meta/step").values.at(0));
    const auto& seed = c.get("meta/seed").values;
    meta->seed = (static_cast<std::uint64_t>(seed.at(0)) << 32) | static_cast<std::uint64_t>(seed.at(1));
    std::ifstream in(dir / "rng.txt");
    std::getline(in, meta->rng_state);
  }
  if (optimizer) {
    if (!c.contains("opt/header")) throw StateError("checkpoint has no optimizer state");
    const auto& h = c.get("opt/header").values;
    *optimizer = h.at(0) == 0.0 ? OptimizerState::adam() : OptimizerState::sgd(h.at(5));
    optimizer->step = static_cast<std::size_t>(h.at(1));
    optimizer->beta1 = h.at(2);
    optimizer->beta2 = h.at(3);
    optimizer->eps = h.at(4);
    for (const auto& [name, _] : model.params.items()) {
      if (c.contains("opt/first/" + name)) optimizer->first.push_back(c.get("opt/first/" + name).values);
      if (c.contains("opt/second/" + name)) optimizer->second.push_back(c.get("opt/second/" + name).values);
    }
  }
  return model;
}

}  // namespace react
