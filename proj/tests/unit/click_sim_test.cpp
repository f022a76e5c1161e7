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

#include <algorithm>
#include <cmath>

#include "cltr/click_sim.hpp"
#include "cltr/error.hpp"
#include "cltr/text.hpp"
#include "test_util.hpp"

namespace cltr {
namespace {

TEST(ClickProbabilities, PerceivedRelevance) {
  EXPECT_DOUBLE_EQ(perceived_relevance_prob(0, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(perceived_relevance_prob(4, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(perceived_relevance_prob(2, 0.1), 0.28);
  EXPECT_THROW(perceived_relevance_prob(5, 0.1), ArgumentError);
  EXPECT_THROW(perceived_relevance_prob(-1, 0.1), ArgumentError);
}

TEST(ClickProbabilities, Examination) {
  EXPECT_EQ(pbm_exam_prob(1, 1.0), 1.0);
  EXPECT_EQ(pbm_exam_prob(2, 1.0), 0.5);
  EXPECT_NEAR(pbm_exam_prob(4, 0.75), 0.35355, 1e-5);
  EXPECT_THROW(pbm_exam_prob(0, 1.0), ArgumentError);
  EXPECT_DOUBLE_EQ(dcm_continuation_prob(1, 0.6, 1.0), 0.6);
  EXPECT_DOUBLE_EQ(dcm_continuation_prob(3, 0.6, 1.0), 0.2);
  EXPECT_EQ(dcm_continuation_prob(7, 0.0, 1.0), 0.0);
  EXPECT_THROW(dcm_continuation_prob(0, 0.6, 1.0), ArgumentError);
}

TEST(Cbcm, SingleDocumentExample) {
  const SimParams params = SimParams::defaults(ClickModel::kCbcm);
  const std::vector<ViewportDoc> viewport = {{4, 1, false}};
  const CbcmDistribution dist = cbcm_click_distribution(viewport, params);
  // Independent evaluation: exp(4 + 1) against exp(6.6).
  EXPECT_NEAR(dist.click[0], std::exp(5.0) / (std::exp(5.0) + std::exp(6.6)), 1e-12);
  EXPECT_NEAR(dist.click[0], 0.168, 1e-3);
  EXPECT_NEAR(dist.click[0] + dist.no_click, 1.0, 1e-15);
}

TEST(Cbcm, PenaltyAndNormalization) {
  const SimParams params = SimParams::defaults(ClickModel::kCbcm);
  const std::vector<ViewportDoc> fresh = {{3, 4, false}, {1, 5, false}};
  const std::vector<ViewportDoc> clicked = {{3, 4, true}, {1, 5, true}};
  const CbcmDistribution a = cbcm_click_distribution(fresh, params);
  const CbcmDistribution b = cbcm_click_distribution(clicked, params);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(b.click[i], a.click[i]);
  EXPECT_NEAR(a.click[0] + a.click[1] + a.no_click, 1.0, 1e-15);
  EXPECT_THROW(cbcm_click_distribution({}, params), ArgumentError);

  SimParams huge = params;
  huge.g = 1e3;
  EXPECT_LT(cbcm_click_distribution(fresh, huge).click[0], 1e-300);
}

TEST(SimulateSession, PbmWithoutNoiseOrRelevanceNeverClicks) {
  SimParams params = SimParams::defaults(ClickModel::kPbm);
  params.epsilon = 0.0;
  Random rng(3);
  const std::vector<int> labels(10, 0);
  for (int s = 0; s < 1000; ++s) {
    for (const auto c : simulate_session(params, labels, rng)) EXPECT_EQ(c, 0);
  }
  EXPECT_THROW(simulate_session(params, std::vector<int>{}, rng), ArgumentError);
  EXPECT_THROW(simulate_session(params, std::vector<int>(11, 1), rng), ArgumentError);
}

TEST(SimulateSession, PbmRankTwoRate) {
  const SimParams params = SimParams::defaults(ClickModel::kPbm);
  Random rng(5);
  const std::vector<int> labels = {0, 4};
  long clicks = 0;
  constexpr long kSessions = 1000000;
  for (long s = 0; s < kSessions; ++s) clicks += simulate_session(params, labels, rng)[1];
  EXPECT_NEAR(static_cast<double>(clicks) / kSessions, 0.5, 0.002);
}

TEST(SimulateSession, DcmContinuationAfterFirstClick) {
  // Rank 1 always clicked (label 4, eps irrelevant); rank 2 is label 4 too,
  // so it is clicked exactly when it is examined.
  const SimParams params = SimParams::defaults(ClickModel::kDcm);
  Random rng(8);
  const std::vector<int> labels = {4, 4, 0};
  long examined = 0;
  constexpr long kSessions = 200000;
  for (long s = 0; s < kSessions; ++s) {
    const auto clicks = simulate_session(params, labels, rng);
    ASSERT_EQ(clicks[0], 1);
    examined += clicks[1];
  }
  const double rate = static_cast<double>(examined) / kSessions;
  EXPECT_NEAR(rate, 0.6, 3.0 * std::sqrt(0.24 / kSessions) + 1e-9);
}

TEST(SimulateSession, DcmNoClickAfterFailedContinuation) {
  // With beta = 0 the session must end at the first click.
  SimParams params = SimParams::defaults(ClickModel::kDcm);
  params.beta = 0.0;
  Random rng(9);
  const std::vector<int> labels = {2, 3, 4, 1, 0, 4, 2, 3, 1, 4};
  for (int s = 0; s < 5000; ++s) {
    int count = 0;
    for (const auto c : simulate_session(params, labels, rng)) count += c;
    EXPECT_LE(count, 1);
  }
}

TEST(SimulateSession, CbcmSessionsStayInDisplay) {
  const SimParams params = SimParams::defaults(ClickModel::kCbcm);
  Random rng(10);
  long clicks = 0;
  for (int s = 0; s < 2000; ++s) {
    const std::vector<int> labels = {4, 3, 2, 1, 0, 4};
    const auto c = simulate_session(params, labels, rng);
    EXPECT_EQ(c.size(), labels.size());
    for (const auto bit : c) clicks += bit;
  }
  EXPECT_GT(clicks, 0);
  // One displayed document: the window is that document alone.
  for (int s = 0; s < 100; ++s) {
    EXPECT_EQ(simulate_session(params, std::vector<int>{2}, rng).size(), 1u);
  }
}

std::vector<QueryGroup> calibration_groups() {
  std::vector<QueryGroup> groups;
  Random rng(12);
  for (int q = 0; q < 100; ++q) {
    std::vector<int> labels(10);
    for (int& y : labels) y = static_cast<int>(rng.index(5));
    groups.push_back(testing_util::make_group("c" + std::to_string(q), labels));
  }
  return groups;
}

std::vector<RankedList> identity_rankings(const std::vector<QueryGroup>& groups) {
  std::vector<RankedList> rankings;
  for (const auto& g : groups) rankings.push_back(testing_util::identity_ranking(g));
  return rankings;
}

double mean_clicks(const ClickLog& log) {
  double total = 0.0;
  for (const Session& s : log.sessions) total += s.click_count();
  return total / static_cast<double>(log.sessions.size());
}

TEST(GenerateLog, SessionCountsAndDeterminism) {
  const auto groups = calibration_groups();
  const auto rankings = identity_rankings(groups);
  const SimParams params = SimParams::defaults(ClickModel::kPbm);
  const ClickLog log = generate_log(groups, rankings, 5, params, 77);
  EXPECT_EQ(log.sessions.size(), 5u * groups.size());
  EXPECT_EQ(click_log_to_text(log), click_log_to_text(generate_log(groups, rankings, 5, params, 77)));
  EXPECT_NE(click_log_to_text(log), click_log_to_text(generate_log(groups, rankings, 5, params, 78)));
}

TEST(GenerateLog, SubstreamsIgnoreQueryOrder) {
  auto groups = calibration_groups();
  const SimParams params = SimParams::defaults(ClickModel::kDcm);
  const ClickLog forward_log = generate_log(groups, identity_rankings(groups), 3, params, 4);
  std::reverse(groups.begin(), groups.end());
  const ClickLog reversed_log = generate_log(groups, identity_rankings(groups), 3, params, 4);
  const std::size_t n = groups.size();
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t s = 0; s < 3; ++s) {
      const Session& a = forward_log.sessions[q * 3 + s];
      const Session& b = reversed_log.sessions[(n - 1 - q) * 3 + s];
      EXPECT_EQ(forward_log.query_id(a), reversed_log.query_id(b));
      EXPECT_EQ(a.clicks, b.clicks);
    }
  }
}

TEST(GenerateLog, TruncatesToDisplayCutoff) {
  const std::vector<QueryGroup> groups = {
      testing_util::make_group("long", std::vector<int>(25, 4))};
  const ClickLog log = generate_log(groups, identity_rankings(groups), 50,
                                    SimParams::defaults(ClickModel::kPbm), 1);
  for (const Session& s : log.sessions) EXPECT_EQ(s.length, kDisplayCutoff);
}

double perceived(int label) { return 0.1 + 0.9 * (std::pow(2.0, label) - 1.0) / 15.0; }

// Exact expected clicks per session over a list shown in order.
double expected_pbm_clicks(const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    total += perceived(labels[k]) / static_cast<double>(k + 1);
  }
  return total;
}

double expected_dcm_clicks(const std::vector<int>& labels) {
  double examined = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double a = perceived(labels[k]);
    total += examined * a;
    examined *= a * 0.6 / static_cast<double>(k + 1) + (1.0 - a);
  }
  return total;
}

std::vector<int> displayed_labels(const QueryGroup& group, const RankedList& ranking) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < ranking.ordering.size() && i < kDisplayCutoff; ++i) {
    labels.push_back(group.documents[static_cast<std::size_t>(ranking.ordering[i])].label);
  }
  return labels;
}

TEST(GenerateLog, ClickVolumesMatchClosedForm) {
  const auto groups = calibration_groups();
  const auto rankings = identity_rankings(groups);
  double pbm_expected = 0.0;
  double dcm_expected = 0.0;
  for (std::size_t q = 0; q < groups.size(); ++q) {
    pbm_expected += expected_pbm_clicks(displayed_labels(groups[q], rankings[q]));
    dcm_expected += expected_dcm_clicks(displayed_labels(groups[q], rankings[q]));
  }
  pbm_expected /= static_cast<double>(groups.size());
  dcm_expected /= static_cast<double>(groups.size());
  // 2e5 sessions: the standard error of either mean is below 0.003.
  EXPECT_NEAR(mean_clicks(generate_log(groups, rankings, 2000, SimParams::defaults(ClickModel::kPbm), 1)),
              pbm_expected, 0.012);
  EXPECT_NEAR(mean_clicks(generate_log(groups, rankings, 2000, SimParams::defaults(ClickModel::kDcm), 1)),
              dcm_expected, 0.012);
}

TEST(GenerateLog, PbmAndDcmClickVolumesAgreeOnRelevanceOrderedLists) {
  // The default DCM parameters are calibrated against PBM on lists from
  // competent rankers; shown here on the toy training queries in label order.
  const auto groups = parse_letor_file(std::string(CLTR_SOURCE_DIR) + "/data/toy/train.txt");
  std::vector<RankedList> rankings;
  for (const QueryGroup& g : groups) {
    RankedList list = testing_util::identity_ranking(g);
    std::stable_sort(list.ordering.begin(), list.ordering.end(), [&](int a, int b) {
      return g.documents[static_cast<std::size_t>(a)].label > g.documents[static_cast<std::size_t>(b)].label;
    });
    rankings.push_back(list);
  }
  const double pbm =
      mean_clicks(generate_log(groups, rankings, 500, SimParams::defaults(ClickModel::kPbm), 1));
  const double dcm =
      mean_clicks(generate_log(groups, rankings, 500, SimParams::defaults(ClickModel::kDcm), 1));
  EXPECT_LT(std::abs(pbm - dcm) / pbm, 0.10) << "PBM " << pbm << " DCM " << dcm;
}

TEST(ClickLogText, RoundTripAndHeader) {
  const auto groups = calibration_groups();
  SimParams params = SimParams::defaults(ClickModel::kCbcm);
  params.g = 6.55;
  const ClickLog log = generate_log(groups, identity_rankings(groups), 4, params, 123456789012345ULL);
  const std::string text = click_log_to_text(log);
  EXPECT_EQ(text.rfind("# cltr-clicklog v1\n", 0), 0u);
  const ClickLog back = click_log_from_text(text);
  EXPECT_EQ(back, log);
  EXPECT_EQ(click_log_to_text(back), text);
  EXPECT_THROW(click_log_from_text("# cltr-clicklog v1\nq,1|2,1\n"), ParseError);
}

TEST(SimParamsTest, ValidationAndNames) {
  SimParams p = SimParams::defaults(ClickModel::kCbcm);
  EXPECT_EQ(p.eta, 0.75);
  EXPECT_EQ(p.g, 6.6);
  p.validate();
  p.viewport_size = 0;
  EXPECT_THROW(p.validate(), ArgumentError);
  EXPECT_EQ(click_model_from_string("DCM"), ClickModel::kDcm);
  EXPECT_EQ(to_string(ClickModel::kCbcm), "CBCM");
  EXPECT_THROW(click_model_from_string("UBM"), ArgumentError);
}

}  // namespace
}  // namespace cltr
