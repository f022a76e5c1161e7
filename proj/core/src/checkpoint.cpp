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

#include <vector>

#include "cltr/error.hpp"
#include "cltr/mlp_ranker.hpp"
#include "cltr/text.hpp"
#include "json.hpp"

namespace cltr {
namespace {

constexpr const char* kFormat = "cltr-mlp";
constexpr int kVersion = 1;

std::vector<double> flat(const Eigen::MatrixXd& m) {
  // Row-major so the file reads naturally as units x inputs.
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return values;
}

std::vector<double> flat(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& j, Eigen::Index size,
                            const char* name) {
  const auto values = j.at(name).get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != size) {
    throw ParseError(std::string("checkpoint field '") + name + "' has wrong size", 0);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), size);
}

}  // namespace

std::string checkpoint_to_json(const MlpParams& params) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["feature_dim"] = params.feature_dim;
  j["hidden"] = params.hidden_sizes();
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : params.layers) {
    nlohmann::json l;
    l["rows"] = layer.weight.rows();
    l["cols"] = layer.weight.cols();
    l["weight"] = flat(layer.weight);
    l["bias"] = flat(layer.bias);
    if (layer.normalized()) {
      l["gain"] = flat(layer.gain);
      l["shift"] = flat(layer.shift);
    }
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j.dump() + "\n";
}

MlpParams checkpoint_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) {
      throw ParseError("not a cltr-mlp checkpoint", 0);
    }
    if (j.at("version").get<int>() != kVersion) {
      throw ParseError("unsupported checkpoint version", 0);
    }
    MlpParams params;
    params.feature_dim = j.at("feature_dim").get<int>();
    const auto& layers = j.at("layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto weights = l.at("weight").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(weights.size()) != rows * cols) {
        throw ParseError("checkpoint weight has wrong size", 0);
      }
      DenseLayer layer;
      layer.weight.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          layer.weight(r, c) = weights[static_cast<std::size_t>(r * cols + c)];
        }
      }
      layer.bias = vector_from(l, rows, "bias");
      const bool is_output = i + 1 == layers.size();
      if (!is_output) {
        layer.gain = vector_from(l, rows, "gain");
        layer.shift = vector_from(l, rows, "shift");
      }
      params.layers.push_back(std::move(layer));
    }
    const int expected_inputs =
        params.layers.empty() ? -1 : static_cast<int>(params.layers[0].weight.cols());
    if (expected_inputs != params.feature_dim ||
        params.layers.back().weight.rows() != 1) {
      throw ParseError("checkpoint layer shapes are inconsistent", 0);
    }
    for (std::size_t i = 1; i < params.layers.size(); ++i) {
      if (params.layers[i].weight.cols() != params.layers[i - 1].weight.rows()) {
        throw ParseError("checkpoint layer shapes are inconsistent", 0);
      }
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid checkpoint: ") + e.what(), 0);
  }
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
  write_file_if_changed(path, checkpoint_to_json(params));
}

MlpParams load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace cltr
