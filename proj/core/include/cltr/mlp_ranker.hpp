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

#ifndef CLTR_MLP_RANKER_HPP_
#define CLTR_MLP_RANKER_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cltr/letor_data.hpp"
#include "cltr/ranking.hpp"

namespace cltr {

inline constexpr std::array<int, 3> kDefaultHiddenSizes = {512, 256, 128};
inline constexpr double kLayerNormEpsilon = 1e-6;

// One fully connected layer. Hidden layers carry layer-norm gain/shift;
// the scalar output layer leaves them empty.
struct DenseLayer {
  Eigen::MatrixXd weight;  // units x inputs
  Eigen::VectorXd bias;
  Eigen::VectorXd gain;
  Eigen::VectorXd shift;

  bool normalized() const { return gain.size() > 0; }
};

// Scoring network: D -> hidden[0] -> ... -> hidden[k-1] -> 1. Each hidden
// layer computes elu(gain * layernorm(W h + b) + shift).
struct MlpParams {
  int feature_dim = 0;
  std::vector<DenseLayer> layers;

  std::vector<int> hidden_sizes() const;
  std::size_t parameter_count() const;

  // Visits every scalar parameter in a fixed order.
  template <typename Fn>
  void for_each_parameter(Fn&& fn);
  template <typename Fn>
  void for_each_parameter(Fn&& fn) const;
};

// Gradients share the parameter layout.
using MlpGrads = MlpParams;

// Glorot-uniform weights (variance 2 / (fan_in + fan_out)), zero biases,
// unit gains, zero shifts. Deterministic in `seed`.
MlpParams init_params(int feature_dim, std::uint64_t seed,
                      std::span<const int> hidden = kDefaultHiddenSizes);

MlpGrads zeros_like(const MlpParams& params);

struct HiddenCache {
  Eigen::MatrixXd normalized;  // (z - mean) / std, rows x units
  Eigen::VectorXd inv_std;     // per row
  Eigen::MatrixXd activation;  // elu output
};

// Intermediates of one forward pass, bound to the parameter snapshot that
// produced them so backward can never see mutated parameters.
struct ForwardCache {
  std::shared_ptr<const MlpParams> params;
  Eigen::MatrixXd input;
  std::vector<HiddenCache> hidden;
};

struct ForwardResult {
  Eigen::VectorXd scores;
  ForwardCache cache;
};

// Scores each row of `batch` (rows x feature_dim).
ForwardResult forward(std::shared_ptr<const MlpParams> params,
                      const Eigen::MatrixXd& batch);

// Cache-free scoring for evaluation.
Eigen::VectorXd predict(const MlpParams& params, const Eigen::MatrixXd& batch);

// Exact gradient of sum_i score_grads[i] * score_i with respect to every
// parameter.
MlpGrads backward(const ForwardCache& cache,
                  const Eigen::VectorXd& score_grads);

// Plain SGD step. Throws TrainingError (tagged with `step`) if any gradient
// entry is non-finite.
MlpParams apply_update(const MlpParams& params, const MlpGrads& grads,
                       double learning_rate, long step = -1);

// In-place accumulation: into += scale * grads.
void accumulate(MlpGrads& into, const MlpGrads& grads, double scale = 1.0);

Eigen::MatrixXd feature_matrix(const QueryGroup& group);
Eigen::MatrixXd feature_matrix(const QueryGroup& group,
                               std::span<const int> doc_indices);

// Documents by descending score, ties by ascending doc_index.
RankedList rank_documents(const MlpParams& params, const QueryGroup& group);

// JSON checkpoint; doubles round-trip exactly.
std::string checkpoint_to_json(const MlpParams& params);
MlpParams checkpoint_from_json(const std::string& text);
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

template <typename Fn>
void MlpParams::for_each_parameter(Fn&& fn) {
  for (DenseLayer& layer : layers) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) fn(layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) fn(layer.bias[i]);
    for (Eigen::Index i = 0; i < layer.gain.size(); ++i) fn(layer.gain[i]);
    for (Eigen::Index i = 0; i < layer.shift.size(); ++i) fn(layer.shift[i]);
  }
}

template <typename Fn>
void MlpParams::for_each_parameter(Fn&& fn) const {
  for (const DenseLayer& layer : layers) {
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) fn(layer.weight.data()[i]);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) fn(layer.bias[i]);
    for (Eigen::Index i = 0; i < layer.gain.size(); ++i) fn(layer.gain[i]);
    for (Eigen::Index i = 0; i < layer.shift.size(); ++i) fn(layer.shift[i]);
  }
}

}  // namespace cltr

#endif  // CLTR_MLP_RANKER_HPP_
