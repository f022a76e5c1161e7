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

#include "cltr/mlp_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cltr/error.hpp"
#include "cltr/random.hpp"

namespace cltr {
namespace {

DenseLayer make_layer(int inputs, int units, bool normalized, Random& rng) {
  DenseLayer layer;
  const double limit = std::sqrt(6.0 / static_cast<double>(inputs + units));
  layer.weight.resize(units, inputs);
  for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
    layer.weight.data()[i] = rng.uniform(-limit, limit);
  }
  layer.bias = Eigen::VectorXd::Zero(units);
  if (normalized) {
    layer.gain = Eigen::VectorXd::Ones(units);
    layer.shift = Eigen::VectorXd::Zero(units);
  }
  return layer;
}

const Eigen::MatrixXd& layer_input(const ForwardCache& cache, std::size_t l) {
  return l == 0 ? cache.input : cache.hidden[l - 1].activation;
}

// Runs the network; fills `hidden` when non-null.
Eigen::VectorXd run(const MlpParams& params, const Eigen::MatrixXd& batch,
                    std::vector<HiddenCache>* hidden) {
  if (batch.cols() != params.feature_dim) {
    throw ArgumentError("batch has " + std::to_string(batch.cols()) +
                        " columns, network expects " +
                        std::to_string(params.feature_dim));
  }
  if (params.layers.empty()) throw ArgumentError("network has no layers");
  Eigen::MatrixXd h = batch;
  for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    const auto units = static_cast<double>(layer.weight.rows());
    Eigen::MatrixXd z = h * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    const Eigen::VectorXd mean = z.rowwise().sum() / units;
    z.colwise() -= mean;
    const Eigen::VectorXd variance = z.array().square().rowwise().sum() / units;
    const Eigen::VectorXd inv_std =
        (variance.array() + kLayerNormEpsilon).rsqrt().matrix();
    z = z.array().colwise() * inv_std.array();
    Eigen::MatrixXd a = z;
    a.array().rowwise() *= layer.gain.transpose().array();
    a.rowwise() += layer.shift.transpose();
    h = a.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
    if (hidden != nullptr) {
      hidden->push_back(HiddenCache{std::move(z), inv_std, h});
    }
  }
  const DenseLayer& out = params.layers.back();
  Eigen::VectorXd scores = h * out.weight.transpose();
  scores.array() += out.bias[0];
  return scores;
}

}  // namespace

std::vector<int> order_by_score(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] >
           scores[static_cast<std::size_t>(b)];
  });
  return order;
}

std::vector<int> MlpParams::hidden_sizes() const {
  std::vector<int> sizes;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    sizes.push_back(static_cast<int>(layers[l].weight.rows()));
  }
  return sizes;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for_each_parameter([&count](double) { ++count; });
  return count;
}

MlpParams init_params(int feature_dim, std::uint64_t seed,
                      std::span<const int> hidden) {
  if (feature_dim < 1) {
    throw ArgumentError("feature_dim must be >= 1, got " +
                        std::to_string(feature_dim));
  }
  for (const int units : hidden) {
    if (units < 1) throw ArgumentError("hidden layer sizes must be >= 1");
  }
  Random rng(seed);
  MlpParams params;
  params.feature_dim = feature_dim;
  int inputs = feature_dim;
  for (const int units : hidden) {
    params.layers.push_back(make_layer(inputs, units, true, rng));
    inputs = units;
  }
  params.layers.push_back(make_layer(inputs, 1, false, rng));
  return params;
}

MlpGrads zeros_like(const MlpParams& params) {
  MlpGrads grads = params;
  grads.for_each_parameter([](double& v) { v = 0.0; });
  return grads;
}

ForwardResult forward(std::shared_ptr<const MlpParams> params,
                      const Eigen::MatrixXd& batch) {
  if (!params) throw ArgumentError("forward called without parameters");
  ForwardResult result;
  result.scores = run(*params, batch, &result.cache.hidden);
  result.cache.input = batch;
  result.cache.params = std::move(params);
  return result;
}

Eigen::VectorXd predict(const MlpParams& params, const Eigen::MatrixXd& batch) {
  return run(params, batch, nullptr);
}

MlpGrads backward(const ForwardCache& cache,
                  const Eigen::VectorXd& score_grads) {
  const MlpParams& params = *cache.params;
  if (score_grads.size() != cache.input.rows()) {
    throw ArgumentError("score_grads length differs from batch rows");
  }
  MlpGrads grads = zeros_like(params);
  const std::size_t n_layers = params.layers.size();

  // Output layer: s = h w^T + b.
  const Eigen::MatrixXd& last = layer_input(cache, n_layers - 1);
  grads.layers.back().weight = score_grads.transpose() * last;
  grads.layers.back().bias[0] = score_grads.sum();
  Eigen::MatrixXd upstream = score_grads * params.layers.back().weight;

  for (std::size_t l = n_layers - 1; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    const HiddenCache& hc = cache.hidden[l];
    DenseLayer& g = grads.layers[l];
    const double units = static_cast<double>(layer.weight.rows());

    // elu'(a) = 1 for a > 0, exp(a) otherwise; a is rebuilt from the cache
    // because elu(a) + 1 cancels for very negative a.
    Eigen::MatrixXd pre = hc.normalized;
    pre.array().rowwise() *= layer.gain.transpose().array();
    pre.rowwise() += layer.shift.transpose();
    const Eigen::MatrixXd d_act =
        upstream.array() *
        pre.unaryExpr([](double a) { return a > 0.0 ? 1.0 : std::exp(a); }).array();
    g.gain = (d_act.array() * hc.normalized.array()).colwise().sum().transpose();
    g.shift = d_act.colwise().sum().transpose();

    Eigen::MatrixXd d_norm = d_act;
    d_norm.array().rowwise() *= layer.gain.transpose().array();
    const Eigen::VectorXd row_sum = d_norm.rowwise().sum();
    const Eigen::VectorXd row_dot =
        (d_norm.array() * hc.normalized.array()).rowwise().sum();
    Eigen::MatrixXd d_pre = units * d_norm;
    d_pre.colwise() -= row_sum;
    d_pre -= (hc.normalized.array().colwise() * row_dot.array()).matrix();
    d_pre.array().colwise() *= (hc.inv_std.array() / units);

    const Eigen::MatrixXd& input = layer_input(cache, l);
    g.weight = d_pre.transpose() * input;
    g.bias = d_pre.colwise().sum().transpose();
    if (l > 0) upstream = d_pre * layer.weight;
  }
  return grads;
}

MlpParams apply_update(const MlpParams& params, const MlpGrads& grads,
                       double learning_rate, long step) {
  bool finite = true;
  grads.for_each_parameter([&finite](double g) { finite = finite && std::isfinite(g); });
  if (!finite) throw TrainingError("non-finite gradient", step);
  if (grads.layers.size() != params.layers.size()) {
    throw ArgumentError("gradient layout differs from parameters");
  }
  MlpParams updated = params;
  accumulate(updated, grads, -learning_rate);
  return updated;
}

void accumulate(MlpGrads& into, const MlpGrads& grads, double scale) {
  if (into.layers.size() != grads.layers.size()) {
    throw ArgumentError("gradient layouts differ");
  }
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    DenseLayer& a = into.layers[l];
    const DenseLayer& b = grads.layers[l];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.gain.size() != b.gain.size()) {
      throw ArgumentError("gradient layouts differ");
    }
    a.weight += scale * b.weight;
    a.bias += scale * b.bias;
    if (a.normalized()) {
      a.gain += scale * b.gain;
      a.shift += scale * b.shift;
    }
  }
}

Eigen::MatrixXd feature_matrix(const QueryGroup& group) {
  const auto rows = static_cast<Eigen::Index>(group.documents.size());
  const auto cols = rows > 0
                        ? static_cast<Eigen::Index>(group.documents[0].features.size())
                        : 0;
  Eigen::MatrixXd matrix(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const FeatureVector& f = group.documents[static_cast<std::size_t>(r)].features;
    matrix.row(r) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), cols);
  }
  return matrix;
}

Eigen::MatrixXd feature_matrix(const QueryGroup& group,
                               std::span<const int> doc_indices) {
  const auto cols =
      group.documents.empty()
          ? 0
          : static_cast<Eigen::Index>(group.documents[0].features.size());
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(doc_indices.size()), cols);
  for (std::size_t r = 0; r < doc_indices.size(); ++r) {
    const FeatureVector& f =
        group.documents.at(static_cast<std::size_t>(doc_indices[r])).features;
    matrix.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXd>(f.data(), cols);
  }
  return matrix;
}

RankedList rank_documents(const MlpParams& params, const QueryGroup& group) {
  if (group.documents.empty()) {
    throw ArgumentError("cannot rank empty query " + group.query_id);
  }
  const Eigen::VectorXd scores = predict(params, feature_matrix(group));
  RankedList ranked;
  ranked.query_id = group.query_id;
  for (const int position : order_by_score({scores.data(), static_cast<std::size_t>(scores.size())})) {
    ranked.ordering.push_back(group.documents[static_cast<std::size_t>(position)].doc_index);
  }
  return ranked;
}

}  // namespace cltr
