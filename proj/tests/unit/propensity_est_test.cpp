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
#include "cltr/propensity_est.hpp"
#include "test_util.hpp"

namespace cltr {
namespace {

using testing_util::make_session;

ClickLog log_of(std::vector<Session> sessions) {
  ClickLog log;
  log.query_ids = {"q"};
  log.sessions = std::move(sessions);
  log.sessions_per_query = static_cast<int>(log.sessions.size());
  return log;
}

TEST(MleDcm, CountingExample) {
  const ClickLog log = log_of({make_session(0, {0, 1, 2}, {1, 0, 1}),
                               make_session(0, {0, 1, 2}, {1, 0, 0})});
  const PropensityTable table = mle_dcm(log, 0.05);
  EXPECT_EQ(table.kind, PropensityKind::kDcmLambda);
  EXPECT_EQ(table.values[0], 0.5);
  EXPECT_EQ(table.values[2], 0.05);
  EXPECT_EQ(table.values[1], 0.05);  // no clicks at rank 2
  EXPECT_THROW(mle_dcm(log_of({})), EstimationError);
}

TEST(MleDcm, RankOneNearBeta) {
  // Label-4 documents everywhere: every examined position is clicked, so
  // a continuation is always followed by a click.
  const std::vector<QueryGroup> groups = {testing_util::make_group("a", std::vector<int>(10, 4))};
  const ClickLog log = generate_log(groups, {testing_util::identity_ranking(groups[0])}, 100000,
                                    SimParams::defaults(ClickModel::kDcm), 3);
  EXPECT_NEAR(mle_dcm(log).values[0], 0.6, 0.05);
}

TEST(SessionPropensity, PbmAndDcmLookups) {
  const PropensityTable pbm = oracle_pbm_table(1.0);
  const Session session = make_session(0, {0, 1, 2, 3, 4, 5}, {0, 1, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(session_propensity(session, 3, pbm), 1.0 / 3.0);

  PropensityTable dcm;
  dcm.kind = PropensityKind::kDcmLambda;
  dcm.values = {0.6, 0.3, 0.2, 0.15, 0.12, 0.1, 0.08, 0.07, 0.06, 0.06};
  EXPECT_EQ(session_propensity(session, 5, dcm), 0.3);
  EXPECT_EQ(session_propensity(session, 1, dcm), 1.0);
  EXPECT_EQ(session_propensity(session, 2, dcm), 1.0);  // the click itself
  EXPECT_THROW(session_propensity(session, 7, dcm), ArgumentError);
  EXPECT_THROW(session_propensity(session, 0, dcm), ArgumentError);

  dcm.values.fill(0.0001);
  EXPECT_EQ(session_propensity(session, 5, dcm), dcm.floor);
}

TEST(PropensityTableTest, CsvRoundTrip) {
  PropensityTable table = oracle_pbm_table(0.75, 0.05);
  table.source_checksum = "abc123";
  const PropensityTable back = PropensityTable::from_csv(table.to_csv());
  EXPECT_EQ(back.values, table.values);
  EXPECT_EQ(back.kind, table.kind);
  EXPECT_EQ(back.floor, table.floor);
  EXPECT_EQ(back.source_checksum, "abc123");
  EXPECT_THROW(PropensityTable::from_csv("rank,value\n1,x\n"), ParseError);
}

// 100 queries x 10 documents, each session showing the documents in a fresh
// random order (so that rank and relevance are separable).
using testing_util::shuffled_pbm_log;
using testing_util::ShuffledLog;

TEST(EmPbm, LikelihoodNeverDecreases) {
  const ShuffledLog data = shuffled_pbm_log(10, 200, 5);
  const PbmClickStats stats = PbmClickStats::from_log(data.log);
  PbmModel model;
  model.examination.fill(0.5);
  model.attraction.assign(stats.pairs.size(), 0.5);
  double previous = pbm_log_likelihood(stats, model);
  for (int it = 0; it < 30; ++it) {
    model = pbm_em_step(stats, model);
    const double current = pbm_log_likelihood(stats, model);
    EXPECT_GE(current, previous - 1e-9) << "iteration " << it;
    previous = current;
  }
}

PbmModel true_model(const PbmClickStats& stats, const std::vector<std::vector<int>>& labels) {
  PbmModel truth;
  for (int k = 0; k < 10; ++k) truth.examination[static_cast<std::size_t>(k)] = 1.0 / (k + 1);
  for (const auto& [query, doc] : stats.pairs) {
    truth.attraction.push_back(
        perceived_relevance_prob(labels[query][static_cast<std::size_t>(doc)], 0.1));
  }
  return truth;
}

TEST(EmPbm, TruthIsFixedPointOfExpectedCounts) {
  // Click counts set to their expectations: the generating parameters must
  // be an exact fixed point.
  Random rng(2);
  std::vector<std::vector<int>> labels;
  PbmClickStats stats;
  for (std::uint32_t q = 0; q < 5; ++q) {
    labels.emplace_back();
    for (int d = 0; d < 10; ++d) {
      labels.back().push_back(static_cast<int>(rng.index(5)));
      stats.pairs.emplace_back(q, d);
    }
  }
  const PbmModel truth = true_model(stats, labels);
  for (std::uint32_t p = 0; p < stats.pairs.size(); ++p) {
    for (int k = 0; k < 10; ++k) {
      const double impressions = 100.0;
      stats.cells.push_back({p, k,
                             impressions * truth.examination[static_cast<std::size_t>(k)] *
                                 truth.attraction[p],
                             impressions});
    }
  }
  const PbmModel twice = pbm_em_step(stats, pbm_em_step(stats, truth));
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_NEAR(twice.examination[k], truth.examination[k], 1e-12);
  }
  for (std::size_t p = 0; p < truth.attraction.size(); ++p) {
    EXPECT_NEAR(twice.attraction[p], truth.attraction[p], 1e-12);
  }
}

TEST(EmPbm, TruthIsNearFixedPointOnLargeLog) {
  const ShuffledLog data = shuffled_pbm_log(100, 10000, 6);
  const PbmClickStats stats = PbmClickStats::from_log(data.log);
  const PbmModel truth = true_model(stats, data.labels);
  const PbmModel twice = pbm_em_step(stats, pbm_em_step(stats, truth));
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_LT(std::abs(twice.examination[k] - truth.examination[k]), 1e-3) << "rank " << k + 1;
  }
}

TEST(EmPbm, NoClicksBelowTopHitFloor) {
  std::vector<Session> sessions;
  for (int s = 0; s < 50; ++s) {
    sessions.push_back(make_session(0, {0, 1, 2, 3}, {s % 2, 0, 0, 0}));
  }
  const PropensityTable table = em_pbm(log_of(sessions));
  EXPECT_EQ(table.values[0], 1.0);
  for (int k = 1; k < 4; ++k) EXPECT_EQ(table.values[static_cast<std::size_t>(k)], table.floor);
  EXPECT_THROW(em_pbm(log_of({})), EstimationError);
}

TEST(EmPbm, TableEntriesWithinBounds) {
  const ShuffledLog data = shuffled_pbm_log(20, 100, 8);
  const PropensityTable table = em_pbm(data.log);
  for (const double v : table.values) {
    EXPECT_GE(v, table.floor);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(table.values[0], 1.0);
}

// Relevance is a deterministic function of feature 0; each query shows its
// documents in its own fixed random order.
struct FeatureLog {
  std::vector<QueryGroup> groups;
  ClickLog log;
};

FeatureLog feature_pbm_log(int queries, int sessions, std::uint64_t seed) {
  FeatureLog out;
  Random rng(seed);
  std::vector<RankedList> rankings;
  for (int q = 0; q < queries; ++q) {
    QueryGroup group;
    group.query_id = "f" + std::to_string(q);
    for (int d = 0; d < 10; ++d) {
      Document doc;
      doc.doc_index = d;
      const int label = static_cast<int>(rng.index(5));
      doc.label = label;
      doc.features = {label / 4.0, rng.uniform(), rng.uniform(), rng.uniform()};
      group.documents.push_back(doc);
    }
    RankedList ranking = testing_util::identity_ranking(group);
    rng.shuffle(ranking.ordering);
    rankings.push_back(ranking);
    out.groups.push_back(std::move(group));
  }
  out.log = generate_log(out.groups, rankings, sessions, SimParams::defaults(ClickModel::kPbm), seed);
  return out;
}

TEST(RegressionEm, RecoversExaminationFromFeatures) {
  const FeatureLog data = feature_pbm_log(200, 500, 21);
  const RegressionEmResult result = regression_em_pbm(data.log, data.groups);
  for (int k = 1; k <= 10; ++k) {
    EXPECT_NEAR(result.table.values[static_cast<std::size_t>(k - 1)], 1.0 / k, 0.05) << "rank " << k;
  }
  Eigen::MatrixXd probe(3, 4);
  probe << 0, 0, 0, 0, 1, 1, 1, 1, 0.5, -3, 9, 0.2;
  for (const double p : result.regressor.predict(probe)) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(RegressionEm, ConstantRegressorMatchesEmExaminationUpdate) {
  const FeatureLog data = feature_pbm_log(10, 50, 4);
  const PbmClickStats stats = PbmClickStats::from_log(data.log);
  std::array<double, kDisplayCutoff> exam;
  exam.fill(0.5);
  const std::vector<double> constant(stats.pairs.size(), 0.3);
  PbmModel model;
  model.examination = exam;
  model.attraction = constant;
  EXPECT_EQ(pbm_em_step(stats, model).examination,
            pbm_examination_update(stats, exam, constant));
}

}  // namespace
}  // namespace cltr
