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

#include "cltr/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cltr/error.hpp"

namespace cltr {
namespace {

double gain(int label) { return std::ldexp(1.0, label) - 1.0; }

double discount(std::size_t position) {
  return 1.0 / std::log2(static_cast<double>(position) + 2.0);
}

void check_cutoff(int k) {
  if (k < 1) throw ArgumentError("cutoff k must be >= 1, got " + std::to_string(k));
}

}  // namespace

std::vector<int> labels_by_doc(const QueryGroup& group) {
  std::vector<int> labels(group.documents.size(), 0);
  for (const Document& doc : group.documents) {
    labels.at(static_cast<std::size_t>(doc.doc_index)) = doc.label;
  }
  return labels;
}

double dcg_at_k(std::span<const int> ordering, std::span<const int> labels, int k) {
  check_cutoff(k);
  const std::size_t depth = std::min(ordering.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) {
    dcg += gain(labels[static_cast<std::size_t>(ordering[i])]) * discount(i);
  }
  return dcg;
}

double ideal_dcg_at_k(std::span<const int> labels, int k) {
  check_cutoff(k);
  std::vector<int> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t depth = std::min(sorted.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t i = 0; i < depth; ++i) dcg += gain(sorted[i]) * discount(i);
  return dcg;
}

double ndcg_at_k(const RankedList& ranking, std::span<const int> labels, int k) {
  check_cutoff(k);
  const double ideal = ideal_dcg_at_k(labels, k);
  if (ideal == 0.0) return 0.0;
  return dcg_at_k(ranking.ordering, labels, k) / ideal;
}

double arp(const RankedList& ranking, std::span<const int> labels) {
  double total = 0.0;
  int relevant = 0;
  for (std::size_t i = 0; i < ranking.ordering.size(); ++i) {
    if (labels[static_cast<std::size_t>(ranking.ordering[i])] > 0) {
      total += static_cast<double>(i + 1);
      ++relevant;
    }
  }
  return relevant > 0 ? total / relevant : 0.0;
}

IncResult inc_ninc(double model_ndcg5, double pr_ndcg5, double skyline_ndcg5) {
  if (pr_ndcg5 == 0.0) {
    throw MetricUndefinedError("production ranker nDCG@5 is 0; Inc is undefined");
  }
  if (skyline_ndcg5 == pr_ndcg5) {
    throw MetricUndefinedError("skyline equals production ranker; nInc is undefined");
  }
  IncResult result;
  result.inc = (model_ndcg5 - pr_ndcg5) / pr_ndcg5;
  const double skyline_inc = (skyline_ndcg5 - pr_ndcg5) / pr_ndcg5;
  result.ninc = result.inc / skyline_inc;
  return result;
}

EvalReport evaluate_ranker(const MlpParams& params,
                           const std::vector<QueryGroup>& groups,
                           const std::string& model_name) {
  if (groups.empty()) throw ArgumentError("cannot evaluate on zero queries");
  EvalReport report;
  report.model_name = model_name;
  for (const int k : kReportCutoffs) report.ndcg_at_k[k] = 0.0;
  for (const QueryGroup& group : groups) {
    const RankedList ranking = rank_documents(params, group);
    const std::vector<int> labels = labels_by_doc(group);
    for (const int k : kReportCutoffs) {
      report.ndcg_at_k[k] += ndcg_at_k(ranking, labels, k);
    }
    report.arp += arp(ranking, labels);
  }
  const double n = static_cast<double>(groups.size());
  for (auto& [k, value] : report.ndcg_at_k) value /= n;
  report.arp /= n;
  report.n_queries = static_cast<int>(groups.size());
  return report;
}

double mean_ndcg(const MlpParams& params, const std::vector<QueryGroup>& groups, int k) {
  if (groups.empty()) return 0.0;
  double total = 0.0;
  for (const QueryGroup& group : groups) {
    total += ndcg_at_k(rank_documents(params, group), labels_by_doc(group), k);
  }
  return total / static_cast<double>(groups.size());
}

}  // namespace cltr
