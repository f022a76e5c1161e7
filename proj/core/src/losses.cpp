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

#include "cltr/losses.hpp"

#include <algorithm>
#include <cmath>

#include "cltr/error.hpp"

namespace cltr {
namespace {

void check_lengths(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ArgumentError("length mismatch: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& scores) {
  const double top = scores.maxCoeff();
  const double log_total = top + std::log((scores.array() - top).exp().sum());
  return scores.array() - log_total;
}

}  // namespace

LossResult loss_click_point(const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& clicks) {
  check_lengths(scores, clicks);
  LossResult result;
  result.score_grads = Eigen::VectorXd::Zero(scores.size());
  if (scores.size() == 0) return result;
  const double n = static_cast<double>(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    result.loss += softplus(scores[i]) - clicks[i] * scores[i];
    result.score_grads[i] = (sigmoid(scores[i]) - clicks[i]) / n;
  }
  result.loss /= n;
  return result;
}

LossResult loss_click_pair(const Eigen::VectorXd& scores,
                           const Eigen::VectorXd& clicks) {
  check_lengths(scores, clicks);
  LossResult result;
  result.score_grads = Eigen::VectorXd::Zero(scores.size());
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (clicks[i] <= 0.0) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (clicks[j] > 0.0) continue;
      const double margin = scores[i] - scores[j];
      result.loss += softplus(-margin);
      const double g = -sigmoid(-margin);
      result.score_grads[i] += g;
      result.score_grads[j] -= g;
      pairs += 1.0;
    }
  }
  if (pairs > 0.0) {
    result.loss /= pairs;
    result.score_grads /= pairs;
  }
  return result;
}

LossResult loss_weighted_softmax(const Eigen::VectorXd& scores,
                                 const Eigen::VectorXd& weights) {
  check_lengths(scores, weights);
  LossResult result;
  result.score_grads = Eigen::VectorXd::Zero(scores.size());
  const double total = weights.sum();
  if (scores.size() == 0 || total == 0.0) return result;
  const Eigen::VectorXd log_probs = log_softmax(scores);
  result.loss = -weights.dot(log_probs);
  result.score_grads = total * log_probs.array().exp().matrix() - weights;
  return result;
}

LossResult loss_click_softmax(const Eigen::VectorXd& scores,
                              const Eigen::VectorXd& clicks) {
  return loss_weighted_softmax(scores, clicks);
}

LossResult loss_ips_softmax(const Eigen::VectorXd& scores,
                            const Eigen::VectorXd& clicks,
                            const Eigen::VectorXd& propensities) {
  check_lengths(scores, clicks);
  check_lengths(scores, propensities);
  if ((propensities.array() <= 0.0).any()) {
    throw ArgumentError("propensities must be positive");
  }
  return loss_weighted_softmax(scores, (clicks.array() / propensities.array()).matrix());
}

Eigen::MatrixXd lambda_weights(const Eigen::VectorXd& scores,
                               const Eigen::VectorXd& clicks) {
  check_lengths(scores, clicks);
  const Eigen::Index n = scores.size();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, n);
  const auto order = order_by_score({scores.data(), static_cast<std::size_t>(n)});
  std::vector<double> discount(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) {
    discount[static_cast<std::size_t>(order[r])] = 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  const auto n_clicked = static_cast<Eigen::Index>((clicks.array() > 0.0).count());
  double ideal = 0.0;
  for (Eigen::Index r = 0; r < n_clicked; ++r) {
    ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  if (ideal == 0.0) return delta;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double gain_gap = std::abs(clicks[i] - clicks[j]);
      delta(i, j) = gain_gap *
                    std::abs(discount[static_cast<std::size_t>(i)] -
                             discount[static_cast<std::size_t>(j)]) /
                    ideal;
    }
  }
  return delta;
}

LossResult loss_prs_pairwise(const Eigen::VectorXd& scores,
                             const Eigen::VectorXd& clicks,
                             const Eigen::VectorXd& propensities,
                             const Eigen::MatrixXd& delta) {
  check_lengths(scores, clicks);
  check_lengths(scores, propensities);
  if (delta.rows() != scores.size() || delta.cols() != scores.size()) {
    throw ArgumentError("delta must be n x n");
  }
  LossResult result;
  result.score_grads = Eigen::VectorXd::Zero(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (clicks[i] <= 0.0) continue;
    for (Eigen::Index j = 0; j < scores.size(); ++j) {
      if (clicks[j] > 0.0) continue;
      const double weight = delta(i, j) * propensities[j] / propensities[i];
      if (weight == 0.0) continue;
      const double margin = scores[i] - scores[j];
      result.loss += weight * softplus(-margin);
      const double g = -weight * sigmoid(-margin);
      result.score_grads[i] += g;
      result.score_grads[j] -= g;
    }
  }
  return result;
}

LossResult loss_lambda_pairwise(const Eigen::VectorXd& scores,
                                const Eigen::VectorXd& clicks,
                                const Eigen::MatrixXd& delta) {
  return loss_prs_pairwise(scores, clicks, Eigen::VectorXd::Ones(scores.size()), delta);
}

LossResult loss_graded_softmax(const Eigen::VectorXd& scores,
                               std::span<const int> labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size()) {
    throw ArgumentError("scores and labels differ in length");
  }
  Eigen::VectorXd target(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    target[i] = std::ldexp(1.0, labels[static_cast<std::size_t>(i)]) - 1.0;
  }
  const double total = target.sum();
  if (total > 0.0) target /= total;
  return loss_weighted_softmax(scores, target);
}

LossResult loss_sigmoid_cross_entropy(const Eigen::VectorXd& scores,
                                      const Eigen::VectorXd& targets,
                                      const Eigen::VectorXd& weights) {
  check_lengths(scores, targets);
  check_lengths(scores, weights);
  LossResult result;
  result.score_grads = Eigen::VectorXd::Zero(scores.size());
  const double total = weights.sum();
  if (!(total > 0.0)) return result;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    result.loss += weights[i] * (softplus(scores[i]) - targets[i] * scores[i]);
    result.score_grads[i] = weights[i] * (sigmoid(scores[i]) - targets[i]) / total;
  }
  result.loss /= total;
  return result;
}

Eigen::VectorXd dla_inverse_examination(const PositionLogits& logits,
                                        std::span<const int> contexts,
                                        double cap) {
  Eigen::VectorXd weights(static_cast<Eigen::Index>(contexts.size()));
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const double log_ratio = logits[0] - logits.at(static_cast<std::size_t>(contexts[i]));
    weights[static_cast<Eigen::Index>(i)] = std::min(std::exp(log_ratio), cap);
  }
  return weights;
}

Eigen::VectorXd dla_inverse_relevance(const Eigen::VectorXd& scores, double cap) {
  if (scores.size() == 0) return scores;
  const double top = scores.maxCoeff();
  return (top - scores.array()).exp().min(cap).matrix();
}

PropensityLossResult loss_dla_propensity(const PositionLogits& logits,
                                         std::span<const int> contexts,
                                         const Eigen::VectorXd& weights) {
  if (static_cast<std::size_t>(weights.size()) != contexts.size()) {
    throw ArgumentError("weights and contexts differ in length");
  }
  Eigen::VectorXd position_logits(weights.size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    position_logits[static_cast<Eigen::Index>(i)] =
        logits.at(static_cast<std::size_t>(contexts[i]));
  }
  const LossResult inner = loss_weighted_softmax(position_logits, weights);
  PropensityLossResult result;
  result.loss = inner.loss;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    result.logit_grads[static_cast<std::size_t>(contexts[i])] +=
        inner.score_grads[static_cast<Eigen::Index>(i)];
  }
  return result;
}

}  // namespace cltr
