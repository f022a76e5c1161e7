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
#include <functional>

#include "cltr/error.hpp"
#include "cltr/losses.hpp"
#include "cltr/random.hpp"
#include "oracles/finite_difference.hpp"

namespace cltr {
namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double x : values) v[i++] = x;
  return v;
}

struct RandomBatch {
  Eigen::VectorXd scores;
  Eigen::VectorXd clicks;
  Eigen::VectorXd propensities;
};

RandomBatch random_batch(Random& rng, int n) {
  RandomBatch b{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    b.scores[i] = 2.0 * rng.normal();
    b.clicks[i] = rng.bernoulli(0.35) ? 1.0 : 0.0;
    b.propensities[i] = rng.uniform(0.05, 1.0);
  }
  if (b.clicks.sum() == 0.0) b.clicks[0] = 1.0;
  if (b.clicks.sum() == n) b.clicks[n - 1] = 0.0;
  return b;
}

void expect_score_gradient(const std::function<LossResult(const Eigen::VectorXd&)>& loss,
                           Eigen::VectorXd scores) {
  const Eigen::VectorXd analytic = loss(scores).score_grads;
  std::vector<double*> slots;
  for (Eigen::Index i = 0; i < scores.size(); ++i) slots.push_back(&scores[i]);
  const auto numeric = oracle::central_differences(slots, [&] { return loss(scores).loss; });
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    EXPECT_LT(oracle::relative_error(analytic[static_cast<Eigen::Index>(i)], numeric[i]), 1e-6)
        << "index " << i;
  }
}

TEST(ClickPoint, Examples) {
  EXPECT_NEAR(loss_click_point(vec({0.0}), vec({1.0})).loss, std::log(2.0), 1e-15);
  const LossResult r = loss_click_point(vec({0.3, -1.0, 2.0}), vec({0, 0, 0}));
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_GT(r.score_grads[i], 0.0);
  EXPECT_LT(loss_click_point(vec({40.0, -40.0}), vec({1, 0})).loss, 1e-15);
  EXPECT_THROW(loss_click_point(vec({0.0, 1.0}), vec({1.0})), ArgumentError);
}

TEST(ClickPair, Examples) {
  EXPECT_NEAR(loss_click_pair(vec({0.5, 0.5}), vec({1, 0})).loss, std::log(2.0), 1e-15);
  const LossResult none = loss_click_pair(vec({0.5, 0.1}), vec({0, 0}));
  EXPECT_EQ(none.loss, 0.0);
  EXPECT_TRUE(none.score_grads.isZero());
  EXPECT_LT(loss_click_pair(vec({60.0, -60.0}), vec({1, 0})).loss, 1e-15);
}

TEST(ClickSoftmax, Examples) {
  EXPECT_NEAR(loss_click_softmax(vec({0.7, 0.7, 0.7, 0.7}), vec({0, 1, 0, 0})).loss,
              std::log(4.0), 1e-14);
  const LossResult none = loss_click_softmax(vec({0.2, 1.0}), vec({0, 0}));
  EXPECT_EQ(none.loss, 0.0);
  EXPECT_TRUE(none.score_grads.isZero());
}

TEST(IpsSoftmax, WeightsClicksByInversePropensity) {
  const Eigen::VectorXd s = vec({0.1, -0.4, 0.9});
  const Eigen::VectorXd c = vec({0, 1, 0});
  EXPECT_DOUBLE_EQ(loss_ips_softmax(s, c, vec({1.0, 0.5, 1.0})).loss,
                   2.0 * loss_click_softmax(s, c).loss);
  EXPECT_THROW(loss_ips_softmax(s, c, vec({1.0, 0.0, 1.0})), ArgumentError);
}

TEST(Prs, RatioAndEmptyClicks) {
  // Clicked at rank 1, unclicked at rank 5 under the 1/k table.
  const Eigen::VectorXd s = vec({0.3, 0.2, 0.1, 0.0, -0.1});
  const Eigen::VectorXd c = vec({1, 0, 0, 0, 0});
  const Eigen::VectorXd p = vec({1.0, 0.5, 1.0 / 3.0, 0.25, 0.2});
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(5, 5);
  delta(0, 4) = 1.0;
  const double weighted = loss_prs_pairwise(s, c, p, delta).loss;
  const double unweighted = loss_lambda_pairwise(s, c, delta).loss;
  EXPECT_NEAR(weighted / unweighted, 0.2, 1e-15);
  EXPECT_EQ(loss_prs_pairwise(s, vec({0, 0, 0, 0, 0}), p, lambda_weights(s, c)).loss, 0.0);
}

TEST(LambdaWeights, SwapDeltaNdcg) {
  // Ranking by score is [0, 1, 2]; click at position 3 only. Swapping it
  // with position 1 moves the gain from 1/log2(4) to 1.
  const Eigen::VectorXd s = vec({3.0, 2.0, 1.0});
  const Eigen::VectorXd c = vec({0, 0, 1});
  const Eigen::MatrixXd delta = lambda_weights(s, c);
  EXPECT_NEAR(delta(2, 0), 1.0 - 0.5, 1e-15);
  EXPECT_NEAR(delta(2, 1), 1.0 / std::log2(3.0) - 0.5, 1e-15);
  EXPECT_EQ(delta(0, 1), 0.0);
  EXPECT_TRUE(lambda_weights(s, vec({0, 0, 0})).isZero());
}

TEST(GradedSoftmax, TargetsFollowGain) {
  const std::vector<int> labels = {0, 2, 4};
  const Eigen::VectorXd s = vec({0.0, 0.0, 0.0});
  // target = (0, 3, 15) / 18
  const double expected = -(3.0 / 18.0) * std::log(1.0 / 3.0) - (15.0 / 18.0) * std::log(1.0 / 3.0);
  EXPECT_NEAR(loss_graded_softmax(s, labels).loss, expected, 1e-14);
  EXPECT_EQ(loss_graded_softmax(s, std::vector<int>{0, 0, 0}).loss, 0.0);
}

TEST(ScoreGradients, MatchFiniteDifferences) {
  Random rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(9));
    const RandomBatch b = random_batch(rng, n);
    const Eigen::MatrixXd delta = lambda_weights(b.scores, b.clicks);
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) labels.push_back(static_cast<int>(rng.index(5)));
    Eigen::VectorXd weights = b.propensities;

    expect_score_gradient([&](const Eigen::VectorXd& s) { return loss_click_point(s, b.clicks); }, b.scores);
    expect_score_gradient([&](const Eigen::VectorXd& s) { return loss_click_pair(s, b.clicks); }, b.scores);
    expect_score_gradient([&](const Eigen::VectorXd& s) { return loss_click_softmax(s, b.clicks); }, b.scores);
    expect_score_gradient(
        [&](const Eigen::VectorXd& s) { return loss_ips_softmax(s, b.clicks, b.propensities); }, b.scores);
    expect_score_gradient(
        [&](const Eigen::VectorXd& s) { return loss_prs_pairwise(s, b.clicks, b.propensities, delta); },
        b.scores);
    expect_score_gradient([&](const Eigen::VectorXd& s) { return loss_graded_softmax(s, labels); }, b.scores);
    expect_score_gradient(
        [&](const Eigen::VectorXd& s) {
          return loss_sigmoid_cross_entropy(s, b.propensities, weights);
        },
        b.scores);
  }
}

TEST(ReductionIdentities, UnitPropensities) {
  Random rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const RandomBatch b = random_batch(rng, 2 + static_cast<int>(rng.index(9)));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(b.scores.size());
    const LossResult ips = loss_ips_softmax(b.scores, b.clicks, ones);
    const LossResult softmax = loss_click_softmax(b.scores, b.clicks);
    EXPECT_NEAR(ips.loss, softmax.loss, 1e-10);
    EXPECT_LT((ips.score_grads - softmax.score_grads).cwiseAbs().maxCoeff(), 1e-10);

    const Eigen::MatrixXd delta = lambda_weights(b.scores, b.clicks);
    const Eigen::VectorXd common = Eigen::VectorXd::Constant(b.scores.size(), b.propensities[0]);
    EXPECT_NEAR(loss_prs_pairwise(b.scores, b.clicks, common, delta).loss,
                loss_lambda_pairwise(b.scores, b.clicks, delta).loss, 1e-10);
  }
}

TEST(Dla, InverseWeights) {
  PositionLogits logits{};
  logits[0] = 0.0;
  logits[1] = std::log(0.5);
  logits[2] = std::log(0.01);
  const std::vector<int> contexts = {0, 1, 2};
  const Eigen::VectorXd inv = dla_inverse_examination(logits, contexts, 20.0);
  EXPECT_NEAR(inv[0], 1.0, 1e-15);
  EXPECT_NEAR(inv[1], 2.0, 1e-12);
  EXPECT_EQ(inv[2], 20.0);  // capped

  const Eigen::VectorXd rel = dla_inverse_relevance(vec({2.0, 2.0 - std::log(3.0), -50.0}), 20.0);
  EXPECT_NEAR(rel[0], 1.0, 1e-15);
  EXPECT_NEAR(rel[1], 3.0, 1e-12);
  EXPECT_EQ(rel[2], 20.0);
}

TEST(Dla, PropensityLossGradient) {
  Random rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    PositionLogits logits{};
    for (double& l : logits) l = rng.normal();
    std::vector<int> contexts;
    Eigen::VectorXd weights(6);
    for (int i = 0; i < 6; ++i) {
      contexts.push_back(static_cast<int>(rng.index(10)));
      weights[i] = rng.bernoulli(0.5) ? rng.uniform(0.5, 3.0) : 0.0;
    }
    const PropensityLossResult analytic = loss_dla_propensity(logits, contexts, weights);
    std::vector<double*> slots;
    for (double& l : logits) slots.push_back(&l);
    const auto numeric = oracle::central_differences(
        slots, [&] { return loss_dla_propensity(logits, contexts, weights).loss; });
    for (std::size_t c = 0; c < 10; ++c) {
      EXPECT_LT(oracle::relative_error(analytic.logit_grads[c], numeric[c]), 1e-6);
    }
  }
}

}  // namespace
}  // namespace cltr
