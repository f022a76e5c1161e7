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

#ifndef CLTR_LOSSES_HPP_
#define CLTR_LOSSES_HPP_

#include <array>
#include <span>

#include <Eigen/Core>

#include "cltr/ranking.hpp"

namespace cltr {

// Loss value and its gradient with respect to each score.
struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd score_grads;
};

// Click vectors hold 0/1 per displayed position.

// Mean binary cross-entropy between sigmoid(score) and the click bit.
LossResult loss_click_point(const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& clicks);

// Mean over (clicked i, unclicked j) pairs of -ln sigmoid(s_i - s_j).
LossResult loss_click_pair(const Eigen::VectorXd& scores,
                           const Eigen::VectorXd& clicks);

// -sum_i weights_i ln softmax(scores)_i.
LossResult loss_weighted_softmax(const Eigen::VectorXd& scores,
                                 const Eigen::VectorXd& weights);

// -sum_i c_i ln softmax(scores)_i.
LossResult loss_click_softmax(const Eigen::VectorXd& scores,
                              const Eigen::VectorXd& clicks);

// -sum_i (c_i / p_i) ln softmax(scores)_i. Propensities must be positive.
LossResult loss_ips_softmax(const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& clicks,
                            const Eigen::VectorXd& propensities);

// |delta nDCG| of swapping i and j in the ranking induced by `scores`, with
// click bits as gains. Entry (i, j) is zero unless exactly one of i, j is
// clicked; all zero when there are no clicks.
Eigen::MatrixXd lambda_weights(const Eigen::VectorXd& scores,
                               const Eigen::VectorXd& clicks);

// sum over (clicked i, unclicked j) of
//   delta(i, j) * (p_j / p_i) * -ln sigmoid(s_i - s_j).
// `delta` is held constant (it does not contribute to the gradient).
LossResult loss_prs_pairwise(const Eigen::VectorXd& scores,
                             const Eigen::VectorXd& clicks,
                             const Eigen::VectorXd& propensities,
                             const Eigen::MatrixXd& delta);

// loss_prs_pairwise with unit propensities.
LossResult loss_lambda_pairwise(const Eigen::VectorXd& scores,
                                const Eigen::VectorXd& clicks,
                                const Eigen::MatrixXd& delta);

// Listwise softmax cross entropy against the distribution proportional to
// 2^label - 1 over the group. Zero when every label is 0.
LossResult loss_graded_softmax(const Eigen::VectorXd& scores,
                               std::span<const int> labels);

// Weighted mean sigmoid cross entropy against soft targets in [0, 1].
LossResult loss_sigmoid_cross_entropy(const Eigen::VectorXd& scores,
                                      const Eigen::VectorXd& targets,
                                      const Eigen::VectorXd& weights);

// ---------------------------------------------------------------------------
// Dual learning.
//
// Examination is modelled by a vector of logits indexed by an examination
// context. Under PBM the context of a position is its rank; under DCM it is
// the rank of the last click above it (0 when there is none). The estimated
// examination of a position relative to context 0 is
// exp(logit[ctx] - logit[0]).

using PositionLogits = std::array<double, kDisplayCutoff>;

// Inverse examination weights exp(logit[0] - logit[ctx_i]), capped at `cap`.
Eigen::VectorXd dla_inverse_examination(const PositionLogits& logits,
                                        std::span<const int> contexts,
                                        double cap);

// Inverse relevance weights exp(max(s) - s_i), capped at `cap`.
Eigen::VectorXd dla_inverse_relevance(const Eigen::VectorXd& scores, double cap);

struct PropensityLossResult {
  double loss = 0.0;
  PositionLogits logit_grads{};
};

// -sum_i weights_i ln softmax_i(logit[ctx_1], ..., logit[ctx_n]); the
// gradient is accumulated per context.
PropensityLossResult loss_dla_propensity(const PositionLogits& logits,
                                         std::span<const int> contexts,
                                         const Eigen::VectorXd& weights);

}  // namespace cltr

#endif  // CLTR_LOSSES_HPP_
