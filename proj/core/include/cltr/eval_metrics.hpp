/*
 * Copyright 2026 The CLTR Robustness Toolkit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CLTR_EVAL_METRICS_HPP_
#define CLTR_EVAL_METRICS_HPP_

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cltr/letor_data.hpp"
#include "cltr/mlp_ranker.hpp"
#include "cltr/ranking.hpp"

namespace cltr {

inline constexpr std::array<int, 4> kReportCutoffs = {1, 3, 5, 10};

// Labels indexed by doc_index.
std::vector<int> labels_by_doc(const QueryGroup& group);

// DCG@k = sum_{i <= min(k, n)} (2^y_(i) - 1) / log2(i + 1).
double dcg_at_k(std::span<const int> ordering, std::span<const int> labels, int k);

// DCG@k over the ideal (label-descending) ordering.
double ideal_dcg_at_k(std::span<const int> labels, int k);

// DCG@k / IDCG@k; 0 when the ideal DCG is 0.
double ndcg_at_k(const RankedList& ranking, std::span<const int> labels, int k);

// Mean rank of the documents with label > 0 (1-based). 0 if there are none.
double arp(const RankedList& ranking, std::span<const int> labels);

struct IncResult {
  double inc = 0.0;
  double ninc = 0.0;
};

// Inc(M) = (m - pr) / pr and nInc(M) = Inc(M) / Inc(skyline).
// Throws MetricUndefinedError if pr == 0 or skyline == pr.
IncResult inc_ninc(double model_ndcg5, double pr_ndcg5, double skyline_ndcg5);

struct EvalReport {
  std::string model_name;
  std::map<int, double> ndcg_at_k;  // cutoff -> mean over queries
  double arp = 0.0;
  double inc = 0.0;
  double ninc = 0.0;
  int n_queries = 0;

  double ndcg5() const { return ndcg_at_k.at(5); }
};

// Ranks every group with `params` and averages nDCG@{1,3,5,10} and ARP
// with equal weight per query. Inc/nInc are left at 0.
EvalReport evaluate_ranker(const MlpParams& params,
                           const std::vector<QueryGroup>& groups,
                           const std::string& model_name);

// Mean nDCG@k of `params` over `groups`.
double mean_ndcg(const MlpParams& params, const std::vector<QueryGroup>& groups, int k);

}  // namespace cltr

#endif  // CLTR_EVAL_METRICS_HPP_
