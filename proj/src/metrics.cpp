// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#include "react/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "react/errors.hpp"

namespace react {

LabelHierarchy::LabelHierarchy(std::vector<std::vector<std::string>> partitions, std::string other)
    : partitions_(std::move(partitions)), other_(std::move(other)) {
  if (partitions_.empty()) throw ConfigError("label hierarchy has no partitions");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < partitions_.size(); ++i) {
    const auto& part = partitions_[i];
    if (part.empty()) throw ConfigError("label partition " + std::to_string(i) + " is empty");
    const auto others = std::count(part.begin(), part.end(), other_);
    const bool last = i + 1 == partitions_.size();
    if (!last && others != 1)
      throw ConfigError("partition " + std::to_string(i) + " must contain exactly one '" + other_ + "' label");
    if (last && others != 0) throw ConfigError("the final partition cannot contain '" + other_ + "'");
    for (const auto& l : part)
      if (l != other_ && !seen.insert(l).second) throw ConfigError("label '" + l + "' appears in two partitions");
  }
}

HierarchicalChoice hierarchical_infer(const std::vector<std::vector<double>>& logits, const LabelHierarchy& h,
                                      bool multi_label) {
  const auto& parts = h.partitions();
  if (logits.size() != parts.size())
    throw ConfigError("got " + std::to_string(logits.size()) + " logit vectors for " + std::to_string(parts.size()) +
                      " partitions");
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& z = logits[p];
    if (z.size() != parts[p].size())
      throw ConfigError("partition " + std::to_string(p) + " has " + std::to_string(parts[p].size()) + " labels but " +
                        std::to_string(z.size()) + " logits");
    const std::size_t best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (parts[p][best] == h.other() && p + 1 < parts.size()) continue;
    double conf;
    if (multi_label) {
      conf = 1.0 / (1.0 + std::exp(-z[best]));
    } else {
      double s = 0.0;
      for (double v : z) s += std::exp(v - z[best]);
      conf = 1.0 / s;
    }
    return {parts[p][best], conf, p};
  }
  throw Error("unreachable: hierarchy without a final partition");
}

std::size_t group_activity_vote(const std::vector<std::vector<std::size_t>>& member_labels,
                                const std::vector<std::size_t>& label_to_group) {
  if (member_labels.empty()) throw ContractError("group vote over an empty group");
  std::vector<std::size_t> counts(label_to_group.size(), 0);
  for (const auto& labels : member_labels)
    for (std::size_t l : labels) {
      if (l >= counts.size()) throw ContractError("label " + std::to_string(l) + " has no group mapping");
      ++counts[l];
    }
  const auto best = std::max_element(counts.begin(), counts.end());
  if (*best == 0) throw ContractError("group vote with no member labels");
  return label_to_group[static_cast<std::size_t>(best - counts.begin())];
}

namespace {

std::size_t mapped(std::size_t v, const MergeMap* merge) {
  if (!merge) return v;
  if (v >= merge->size()) throw ContractError("class " + std::to_string(v) + " is missing from the merge map");
  return (*merge)[v];
}

void check_pairs(std::size_t a, std::size_t b) {
  if (a != b) throw ContractError("predictions and labels differ in length");
  if (a == 0) throw ContractError("accuracy of an empty set");
}

}  // namespace

double mca(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels, const MergeMap* merge) {
  check_pairs(preds.size(), labels.size());
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += mapped(preds[i], merge) == mapped(labels[i], merge);
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

double mpca(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels, const MergeMap* merge) {
  check_pairs(preds.size(), labels.size());
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> per;  // class -> (hits, total)
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& [hit, total] = per[mapped(labels[i], merge)];
    hit += mapped(preds[i], merge) == mapped(labels[i], merge);
    ++total;
  }
  double s = 0.0;
  for (const auto& [_, ht] : per) s += static_cast<double>(ht.first) / static_cast<double>(ht.second);
  return s / static_cast<double>(per.size());
}

PrfScores multilabel_prf(const std::vector<std::vector<std::size_t>>& pred_sets,
                         const std::vector<std::vector<std::size_t>>& gt_sets) {
  if (pred_sets.size() != gt_sets.size()) throw ContractError("prediction and label set counts differ");
  PrfScores s;
  for (std::size_t i = 0; i < gt_sets.size(); ++i) {
    const std::set<std::size_t> p(pred_sets[i].begin(), pred_sets[i].end()), g(gt_sets[i].begin(), gt_sets[i].end());
    if (g.empty()) {
      ++s.skipped;
      continue;
    }
    std::size_t both = 0;
    for (std::size_t l : p) both += g.count(l);
    const double pr = p.empty() ? 0.0 : static_cast<double>(both) / static_cast<double>(p.size());
    const double rc = static_cast<double>(both) / static_cast<double>(g.size());
    s.precision += pr;
    s.recall += rc;
    s.f1 += pr + rc == 0.0 ? 0.0 : 2.0 * pr * rc / (pr + rc);
    ++s.samples;
  }
  if (s.samples > 0) {
    const double n = static_cast<double>(s.samples);
    s.precision /= n;
    s.recall /= n;
    s.f1 /= n;
  }
  return s;
}

std::vector<std::size_t> retrieval_ranks(const std::vector<std::vector<double>>& queries,
                                         const std::vector<std::vector<double>>& candidates,
                                         const std::vector<std::size_t>& gt) {
  if (queries.size() != gt.size()) throw ContractError("one ground-truth index per query is required");
  auto norm = [](const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); };
  std::vector<std::size_t> ranks;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    if (gt[q] >= candidates.size()) throw ContractError("ground-truth candidate index out of range");
    std::vector<double> sim(candidates.size());
    const double nq = norm(queries[q]);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (candidates[c].size() != queries[q].size()) throw DimensionError("query and candidate widths differ");
      const double den = nq * norm(candidates[c]);
      sim[c] = den == 0.0 ? 0.0 : std::inner_product(queries[q].begin(), queries[q].end(), candidates[c].begin(), 0.0) / den;
    }
    std::size_t rank = 1;
    for (std::size_t c = 0; c < candidates.size(); ++c)
      if (sim[c] > sim[gt[q]] || (sim[c] == sim[gt[q]] && c < gt[q])) ++rank;
    ranks.push_back(rank);
  }
  return ranks;
}

double recall_from_ranks(const std::vector<std::size_t>& ranks, std::size_t k, std::size_t candidates) {
  if (k == 0 || k > candidates)
    throw ConfigError("R@" + std::to_string(k) + " needs between 1 and " + std::to_string(candidates) + " candidates");
  if (ranks.empty()) throw ContractError("recall over an empty query set");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double recall_at_k(const std::vector<std::vector<double>>& queries, const std::vector<std::vector<double>>& candidates,
                   const std::vector<std::size_t>& gt, std::size_t k) {
  if (k == 0 || k > candidates.size())
    throw ConfigError("R@" + std::to_string(k) + " needs between 1 and " + std::to_string(candidates.size()) +
                      " candidates");
  return recall_from_ranks(retrieval_ranks(queries, candidates, gt), k, candidates.size());
}

}  // namespace react
