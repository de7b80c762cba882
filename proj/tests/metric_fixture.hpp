// Copyright (C) 2026 The react-gar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "react/errors.hpp"
#include "react/metrics.hpp"

namespace react::testing {

// Frozen 10-sample metric fixture (tests/fixtures/metrics_10.jsonl).
struct MetricFixture {
  std::vector<std::vector<double>> candidates;
  std::vector<std::size_t> group_pred, group_gt, retrieval_gt;
  std::vector<std::vector<std::size_t>> actions_pred, actions_gt;
  std::vector<std::vector<double>> queries;
};

inline MetricFixture load_metric_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  MetricFixture f;
  std::string line;
  std::getline(in, line);
  f.candidates = nlohmann::json::parse(line).at("candidates").get<std::vector<std::vector<double>>>();
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    f.group_pred.push_back(j.at("group_pred"));
    f.group_gt.push_back(j.at("group_gt"));
    f.actions_pred.push_back(j.at("actions_pred"));
    f.actions_gt.push_back(j.at("actions_gt"));
    f.queries.push_back(j.at("query"));
    f.retrieval_gt.push_back(j.at("retrieval_gt"));
  }
  return f;
}

// Six group classes {l-spike, l-set, l-pass, r-spike, r-set, r-pass}; set merges into pass.
inline const MergeMap& fixture_merge() {
  static const MergeMap m{0, 2, 2, 3, 5, 5};
  return m;
}

// Golden values worked out by hand from the fixture rows.
//   group: 6 of 10 exact; samples 3, 5 and 8 only differ by set/pass -> merged 9/10.
//   per-class accuracy over gt classes {0: 1, 1: 1/2, 2: 1/2, 3: 1/2, 4: 1, 5: 1/2} -> 2/3.
//   action sets: sample 6 has no gt and is skipped; over the other 9,
//     P = (1 + 1/2 + 0 + 1 + 1/3 + 0 + 1 + 1/2 + 1) / 9 = 16/27
//     R = (1 + 1/2 + 0 + 1/2 + 1 + 0 + 1 + 1 + 1/3) / 9 = 16/27
//     F = (1 + 1/2 + 0 + 2/3 + 1/2 + 0 + 1 + 2/3 + 1/2) / 9 = 29/54
//   retrieval: candidates at 0, 10, ..., 110 degrees, each query 1 degree past
//     an anchor candidate; gt ranks are 1, 1, 2, 3, 4, 5, 6, 6, 12, 10.
struct MetricGolden {
  double mca = 0.6, merged_mca = 0.9, mpca = 2.0 / 3.0;
  double p = 16.0 / 27.0, r = 16.0 / 27.0, f = 29.0 / 54.0;
  std::size_t prf_samples = 9, prf_skipped = 1;
  std::vector<std::size_t> ranks{1, 1, 2, 3, 4, 5, 6, 6, 12, 10};
  double r1 = 0.2, r5 = 0.6, r10 = 0.9;
};

}  // namespace react::testing
