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

#include <gtest/gtest.h>

#include <cmath>

#include "cltr/error.hpp"
#include "cltr/eval_metrics.hpp"
#include "cltr/random.hpp"
#include "oracles/brute_force_ndcg.hpp"

namespace cltr {
namespace {

RankedList ranking_of(std::vector<int> ordering) {
  RankedList list;
  list.ordering = std::move(ordering);
  return list;
}

TEST(Ndcg, IdealOrderingIsOne) {
  const std::vector<int> labels = {1, 4, 0, 2};
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking_of({1, 3, 0, 2}), labels, 3), 1.0);
}

TEST(Ndcg, WorstFirstPair) {
  const std::vector<int> labels = {0, 4};
  const double expected = (15.0 / std::log2(3.0)) / 15.0;
  EXPECT_NEAR(ndcg_at_k(ranking_of({0, 1}), labels, 2), expected, 1e-15);
  EXPECT_NEAR(expected, 0.6309, 1e-4);
  EXPECT_NEAR(dcg_at_k(std::vector<int>{0, 1}, labels, 2), 9.46395, 1e-5);
}

TEST(Ndcg, InvalidCutoffAndZeroIdeal) {
  const std::vector<int> labels = {0, 0};
  EXPECT_THROW(ndcg_at_k(ranking_of({0, 1}), labels, 0), ArgumentError);
  EXPECT_EQ(ndcg_at_k(ranking_of({0, 1}), labels, 2), 0.0);
}

TEST(Ndcg, MatchesBruteForceOracle) {
  Random rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(8));
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int& y : labels) y = static_cast<int>(rng.index(5));
    RankedList list;
    for (int i = 0; i < n; ++i) list.ordering.push_back(i);
    rng.shuffle(list.ordering);
    const int k = 1 + static_cast<int>(rng.index(10));
    std::vector<int> in_rank_order;
    for (const int d : list.ordering) in_rank_order.push_back(labels[static_cast<std::size_t>(d)]);
    EXPECT_NEAR(ndcg_at_k(list, labels, k), oracle::brute_force_ndcg(in_rank_order, k), 1e-12);
  }
}

TEST(Ndcg, InvariantBelowCutoff) {
  const std::vector<int> labels = {3, 0, 2, 1, 4, 0};
  const double a = ndcg_at_k(ranking_of({4, 0, 2, 1, 3, 5}), labels, 3);
  const double b = ndcg_at_k(ranking_of({4, 0, 2, 5, 1, 3}), labels, 3);
  EXPECT_EQ(a, b);
}

TEST(Arp, Definition) {
  EXPECT_EQ(arp(ranking_of({0, 1, 2}), std::vector<int>{2, 0, 0}), 1.0);
  EXPECT_EQ(arp(ranking_of({0, 1, 2}), std::vector<int>{1, 0, 3}), 2.0);
  EXPECT_EQ(arp(ranking_of({4, 3, 2, 1, 0}), std::vector<int>{1, 0, 0, 0, 0}), 5.0);
}

TEST(IncNinc, Identities) {
  EXPECT_EQ(inc_ninc(0.8, 0.7, 0.8).ninc, 1.0);
  const IncResult pr = inc_ninc(0.7, 0.7, 0.8);
  EXPECT_EQ(pr.inc, 0.0);
  EXPECT_EQ(pr.ninc, 0.0);
  const IncResult mid = inc_ninc(0.75, 0.70, 0.80);
  EXPECT_NEAR(mid.inc, 0.05 / 0.7, 1e-12);
  EXPECT_NEAR(mid.ninc, 0.5, 1e-12);
  EXPECT_THROW(inc_ninc(0.5, 0.0, 0.8), MetricUndefinedError);
  EXPECT_THROW(inc_ninc(0.5, 0.7, 0.7), MetricUndefinedError);
}

TEST(IncNinc, MonotoneAndScaleInvariant) {
  double previous = -1e9;
  for (double m = 0.5; m < 0.9; m += 0.01) {
    const double ninc = inc_ninc(m, 0.6, 0.85).ninc;
    EXPECT_GT(ninc, previous);
    previous = ninc;
    EXPECT_NEAR(inc_ninc(m * 0.5, 0.3, 0.425).ninc, ninc, 1e-12);
  }
}

TEST(EvaluateRanker, AveragesPerQuery) {
  MlpParams params = init_params(1, 3, std::vector<int>{2});
  // Zero the network so every document ties and rank order is doc order.
  params.for_each_parameter([](double& v) { v = 0.0; });
  QueryGroup a;
  a.query_id = "a";
  QueryGroup b;
  b.query_id = "b";
  for (int i = 0; i < 2; ++i) {
    a.documents.push_back({i, {0.0}, i == 0 ? 2 : 0});
    b.documents.push_back({i, {0.0}, i == 1 ? 2 : 0});
  }
  const EvalReport report = evaluate_ranker(params, {a, b}, "zero");
  EXPECT_EQ(report.n_queries, 2);
  EXPECT_NEAR(report.ndcg_at_k.at(1), 0.5, 1e-15);
  EXPECT_NEAR(report.arp, 1.5, 1e-15);
  EXPECT_EQ(report.ndcg_at_k.size(), kReportCutoffs.size());
}

}  // namespace
}  // namespace cltr
