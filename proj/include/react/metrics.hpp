// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace react {

/// Ordered label partitions; every partition but the last holds exactly one
/// "Other" sentinel that defers the decision to the next partition.
class LabelHierarchy {
 public:
  LabelHierarchy(std::vector<std::vector<std::string>> partitions, std::string other = "other");

  const std::vector<std::vector<std::string>>& partitions() const { return partitions_; }
  const std::string& other() const { return other_; }

 private:
  std::vector<std::vector<std::string>> partitions_;
  std::string other_;
};

struct HierarchicalChoice {
  std::string label;
  double confidence = 0.0;  // softmax (or sigmoid) score of the chosen label
  std::size_t partition = 0;
};

/// Argmax of the first partition, descending to the next one only when the
/// winner is "Other". multi_label selects sigmoid scores instead of softmax;
/// the argmax is the same either way. Ties go to the lowest index.
HierarchicalChoice hierarchical_infer(const std::vector<std::vector<double>>& logits, const LabelHierarchy& h,
                                      bool multi_label = false);

/// Most frequent action label over all members' label lists (ties: lowest
/// label index), mapped to its group activity through label_to_group.
std::size_t group_activity_vote(const std::vector<std::vector<std::size_t>>& member_labels,
                                const std::vector<std::size_t>& label_to_group);

/// Fine class -> merged class; must be defined for every fine class.
using MergeMap = std::vector<std::size_t>;

/// Overall accuracy, optionally after mapping both sides through merge.
double mca(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels,
           const MergeMap* merge = nullptr);
/// Mean over classes present in labels of per-class accuracy.
double mpca(const std::vector<std::size_t>& preds, const std::vector<std::size_t>& labels,
            const MergeMap* merge = nullptr);

struct PrfScores {
  double precision = 0, recall = 0, f1 = 0;
  std::size_t samples = 0;  // samples averaged over
  std::size_t skipped = 0;  // samples with an empty ground-truth set
};

/// Per-sample precision / recall / F1 of label sets, averaged over samples.
PrfScores multilabel_prf(const std::vector<std::vector<std::size_t>>& pred_sets,
                         const std::vector<std::vector<std::size_t>>& gt_sets);

/// Cosine similarity ranking of candidates for each query; 1-based rank of
/// the ground-truth candidate (ties broken by candidate index).
std::vector<std::size_t> retrieval_ranks(const std::vector<std::vector<double>>& queries,
                                         const std::vector<std::vector<double>>& candidates,
                                         const std::vector<std::size_t>& gt);
double recall_at_k(const std::vector<std::vector<double>>& queries, const std::vector<std::vector<double>>& candidates,
                   const std::vector<std::size_t>& gt, std::size_t k);
/// Fraction of ranks <= k.
double recall_from_ranks(const std::vector<std::size_t>& ranks, std::size_t k, std::size_t candidates);

}  // namespace react
