// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "react/errors.hpp"

namespace react {

SupervisionMode parse_mode(const std::string& s) {
  if (s == "full") return SupervisionMode::full;
  if (s == "weak") return SupervisionMode::weak;
  throw ConfigError("mode must be 'full' or 'weak', got '" + s + "'");
}

std::string to_string(SupervisionMode m) { return m == SupervisionMode::full ? "full" : "weak"; }

namespace {

std::string format_value(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
  return std::string(buf, r.ptr);
}
std::string format_value(bool v) { return v ? "true" : "false"; }
template <typename U>
  requires std::is_integral_v<U> && (!std::is_same_v<U, bool>)
std::string format_value(U v) {
  return std::to_string(v);
}
std::string format_value(const std::string& v) { return v; }

void parse_value(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError("expected a number, got '" + s + "'");
}
template <typename U>
  requires std::is_integral_v<U> && (!std::is_same_v<U, bool>)
void parse_value(const std::string& s, U& out) {
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) throw ConfigError("expected a non-negative integer, got '" + s + "'");
}
void parse_value(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "on") out = true;
  else if (s == "false" || s == "0" || s == "off") out = false;
  else throw ConfigError("expected true/false, got '" + s + "'");
}
void parse_value(const std::string& s, std::string& out) { out = s; }

template <typename S, typename V>
ConfigField field(const char* section, const char* key, const char* doc, S ModelConfig::*sec, V S::*member) {
  return {section, key, doc, [=](const ModelConfig& c) { return format_value((c.*sec).*member); },
          [=](ModelConfig& c, const std::string& v) { parse_value(v, (c.*sec).*member); }};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

const std::vector<ConfigField>& config_fields() {
  using C = ModelConfig;
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    f.push_back({"meta", "version", "config format version",
                 [](const C& c) { return std::to_string(c.version); },
                 [](C& c, const std::string& v) { parse_value(v, c.version); }});
    f.push_back(field("model", "frames", "sampled frames per clip (T)", &C::model, &ModelSection::frames));
    f.push_back(field("model", "height", "raster height in pixels", &C::model, &ModelSection::height));
    f.push_back(field("model", "width", "raster width in pixels", &C::model, &ModelSection::width));
    f.push_back(field("model", "channels", "raster channels", &C::model, &ModelSection::channels));
    f.push_back(field("model", "grid", "patch cells per side (HW = grid^2)", &C::model, &ModelSection::grid));
    f.push_back(field("model", "d_model", "feature width d", &C::model, &ModelSection::d_model));
    f.push_back(field("model", "heads", "attention heads", &C::model, &ModelSection::heads));
    f.push_back(field("model", "d_ff", "feed-forward hidden width", &C::model, &ModelSection::d_ff));
    f.push_back(field("model", "encoder_layers", "vision-language encoder layers (0: features only)", &C::model,
                      &ModelSection::encoder_layers));
    f.push_back(field("model", "decoder_layers", "action decoder layers (0: direct box head)", &C::model,
                      &ModelSection::decoder_layers));
    f.push_back(field("model", "queries", "actor queries N", &C::model, &ModelSection::queries));
    f.push_back(field("model", "max_text", "longest prompt in tokens", &C::model, &ModelSection::max_text));
    f.push_back(field("model", "dropout", "attention dropout", &C::model, &ModelSection::dropout));
    f.push_back(field("model", "actor_fusion", "fuse box positions with text (off: learned queries)", &C::model,
                      &ModelSection::actor_fusion));
    f.push_back(field("model", "fusion_kernel", "actor fusion refinement conv width", &C::model,
                      &ModelSection::fusion_kernel));
    f.push_back(field("model", "temporal_encoding", "temporal positional encoding in the encoder", &C::model,
                      &ModelSection::temporal_encoding));
    f.push_back(field("model", "fast_branch", "temporal conv branch in the encoder", &C::model,
                      &ModelSection::fast_branch));
    f.push_back(field("model", "teacher_forcing", "attend to ground-truth boxes while training", &C::model,
                      &ModelSection::teacher_forcing));
    f.push_back(field("model", "init_seed", "parameter initialisation seed", &C::model, &ModelSection::init_seed));
    f.push_back(field("loss", "l1", "box L1 weight", &C::loss, &LossSection::l1));
    f.push_back(field("loss", "giou", "box gIoU weight", &C::loss, &LossSection::giou));
    f.push_back(field("loss", "group_ce", "group activity cross-entropy weight", &C::loss, &LossSection::group_ce));
    f.push_back(field("loss", "action_bce", "per-actor action BCE weight", &C::loss, &LossSection::action_bce));
    f.push_back(field("loss", "aux_layers", "box losses on every decoder layer", &C::loss, &LossSection::aux_layers));
    f.push_back(field("train", "seed", "shuffle and dropout seed", &C::train, &TrainSection::seed));
    f.push_back(field("train", "mode", "full or weak supervision", &C::train, &TrainSection::mode));
    f.push_back(field("train", "epochs", "training epochs", &C::train, &TrainSection::epochs));
    f.push_back(field("train", "batch", "clips per optimizer step", &C::train, &TrainSection::batch));
    f.push_back(field("train", "max_steps", "stop after this many steps (0: no cap)", &C::train, &TrainSection::max_steps));
    f.push_back(field("train", "peak_lr", "Adam learning rate after warm-up", &C::train, &TrainSection::peak_lr));
    f.push_back(field("train", "warmup_epochs", "linear warm-up length in epochs", &C::train, &TrainSection::warmup_epochs));
    f.push_back(field("train", "wd_start", "weight decay at step 0", &C::train, &TrainSection::wd_start));
    f.push_back(field("train", "wd_end", "weight decay at the last step", &C::train, &TrainSection::wd_end));
    f.push_back(field("train", "clip_norm", "global gradient norm cap (0: off)", &C::train, &TrainSection::clip_norm));
    f.push_back(field("train", "eval_every", "epochs between evaluations", &C::train, &TrainSection::eval_every));
    f.push_back(field("train", "select_metric", "metric that picks the best checkpoint", &C::train,
                      &TrainSection::select_metric));
    f.push_back(field("probe", "epochs", "linear probe epochs", &C::probe, &ProbeSection::epochs));
    f.push_back(field("probe", "batch", "linear probe batch size", &C::probe, &ProbeSection::batch));
    f.push_back(field("probe", "lr", "linear probe initial SGD learning rate", &C::probe, &ProbeSection::lr));
    f.push_back(field("probe", "momentum", "linear probe SGD momentum", &C::probe, &ProbeSection::momentum));
    f.push_back(field("probe", "seed", "linear probe shuffle seed", &C::probe, &ProbeSection::seed));
    f.push_back(field("data", "clips", "synthetic clips to generate", &C::data, &DataSection::clips));
    f.push_back(field("data", "actors", "actors per synthetic clip", &C::data, &DataSection::actors));
    f.push_back(field("data", "corpus_seed", "synthetic corpus seed", &C::data, &DataSection::corpus_seed));
    f.push_back(field("data", "train_ratio", "fraction of clips in the train split", &C::data, &DataSection::train_ratio));
    f.push_back(field("data", "split_seed", "train/test split seed", &C::data, &DataSection::split_seed));
    f.push_back(field("data", "prompt", "text prompt paired with every clip", &C::data, &DataSection::prompt));
    f.push_back(field("data", "vocab", "vocabulary file, or 'builtin'", &C::data, &DataSection::vocab));
    f.push_back(field("labels", "actions", "comma-separated action labels", &C::labels, &LabelsSection::actions));
    f.push_back(field("labels", "groups", "comma-separated group activity labels", &C::labels, &LabelsSection::groups));
    f.push_back(field("labels", "merge", "group merges for Merged MCA, 'from:to' pairs", &C::labels,
                      &LabelsSection::merge));
    return f;
  }();
  return fields;
}

LabelSpace ModelConfig::label_space() const {
  LabelSpace s;
  s.actions = split_list(labels.actions);
  s.groups = split_list(labels.groups);
  for (const auto& pair : split_list(labels.merge)) {
    const auto colon = pair.find(':');
    if (colon == std::string::npos) throw ConfigError("labels.merge entry '" + pair + "' is not 'from:to'");
    const std::string from = pair.substr(0, colon), to = pair.substr(colon + 1);
    if (!s.has_group(from) || !s.has_group(to)) throw ConfigError("labels.merge names an unknown group in '" + pair + "'");
    s.merge[from] = to;
  }
  return s;
}

LossWeights ModelConfig::loss_weights() const {
  LossWeights w;
  w.l1 = loss.l1;
  w.giou = loss.giou;
  w.group_ce = loss.group_ce;
  w.action_bce = loss.action_bce;
  w.aux_layers = loss.aux_layers;
  return w;
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(version == kVersion, "unsupported config version " + std::to_string(version));
  const auto& m = model;
  need(m.frames > 0, "model.frames must be positive");
  need(m.grid > 0 && m.height % m.grid == 0 && m.width % m.grid == 0, "model.grid must divide height and width");
  need(m.channels > 0, "model.channels must be positive");
  need(m.d_model > 0 && m.d_model % 4 == 0, "model.d_model must be a positive multiple of 4");
  need(m.heads > 0 && m.d_model % m.heads == 0, "model.heads must divide model.d_model");
  need(m.d_ff > 0, "model.d_ff must be positive");
  need(m.queries > 0, "model.queries must be positive");
  need(m.max_text > 0, "model.max_text must be positive");
  need(m.dropout >= 0.0 && m.dropout < 1.0, "model.dropout must lie in [0, 1)");
  need(m.fusion_kernel % 2 == 1, "model.fusion_kernel must be odd");
  need(loss.l1 >= 0 && loss.giou >= 0 && loss.group_ce >= 0 && loss.action_bce >= 0, "loss weights must be >= 0");
  parse_mode(train.mode);
  need(train.batch > 0, "train.batch must be positive");
  need(train.peak_lr >= 0, "train.peak_lr must be >= 0");
  need(train.warmup_epochs >= 0 && (train.epochs == 0 || train.warmup_epochs < static_cast<double>(train.epochs)),
       "train.warmup_epochs must be below train.epochs");
  need(train.wd_start >= 0 && train.wd_start <= train.wd_end, "weight decay bounds must satisfy 0 <= wd_start <= wd_end");
  need(train.clip_norm >= 0, "train.clip_norm must be >= 0");
  need(train.eval_every > 0, "train.eval_every must be positive");
  need(probe.batch > 0 && probe.lr >= 0 && probe.momentum >= 0 && probe.momentum < 1, "invalid probe settings");
  need(data.train_ratio >= 0 && data.train_ratio <= 1, "data.train_ratio must lie in [0, 1]");
  need(data.actors > 0 && data.actors <= m.queries, "data.actors must be in [1, model.queries]");
  const auto labels_ = label_space();
  need(!labels_.actions.empty() && !labels_.groups.empty(), "label lists must not be empty");
}

ModelConfig parse_config(std::istream& in, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), e.message());
  }
  ModelConfig cfg;
  std::set<std::string> known;
  for (const auto& f : config_fields()) known.insert(f.section + "." + f.key);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(source + ": key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body)
      if (!known.count(section + "." + key)) throw ConfigError(source + ": unknown setting " + section + "." + key);
  }
  for (const auto& f : config_fields()) {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(f.section + "." + f.key, '.'));
    if (!v) continue;
    try {
      f.set(cfg, *v);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": " + f.section + "." + f.key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

void write_config(std::ostream& os, const ModelConfig& cfg) {
  os << "# react-gar configuration\n";
  std::string section;
  for (const auto& f : config_fields()) {
    if (f.section != section) {
      section = f.section;
      os << "\n[" << section << "]\n";
    }
    os << "# " << f.doc << "\n" << f.key << " = " << f.get(cfg) << "\n";
  }
}

void save_config(const std::filesystem::path& path, const ModelConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write config " + path.string());
  write_config(os, cfg);
}

void apply_override(ModelConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override '" + assignment + "' is not section.key=value");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  const std::string section = trim(assignment.substr(0, dot)), key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  for (const auto& f : config_fields())
    if (f.section == section && f.key == key) {
      f.set(cfg, value);
      return;
    }
  throw ConfigError("unknown setting " + section + "." + key);
}

std::string describe_config() {
  const ModelConfig defaults;
  std::ostringstream os;
  os << "Config fields (section.key = default: description):\n";
  for (const auto& f : config_fields())
    os << "  " << std::left << std::setw(26) << (f.section + "." + f.key) << " = " << std::setw(12) << f.get(defaults)
       << " " << f.doc << "\n";
  return os.str();
}

}  // namespace react
