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

#include <benchmark/benchmark.h>

#include <memory>

#include "cltr/mlp_ranker.hpp"
#include "cltr/random.hpp"

namespace {

Eigen::MatrixXd random_features(Eigen::Index rows, Eigen::Index cols) {
  cltr::Random rng(42);
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return x;
}

// Rows = documents in a batch; the network is the default 512/256/128.
void BM_Forward(benchmark::State& state) {
  const auto params = std::make_shared<const cltr::MlpParams>(cltr::init_params(64, 1));
  const Eigen::MatrixXd x = random_features(state.range(0), 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::predict(*params, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(10)->Arg(256)->Arg(2560)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto params = std::make_shared<const cltr::MlpParams>(cltr::init_params(64, 1));
  const Eigen::MatrixXd x = random_features(state.range(0), 64);
  const Eigen::VectorXd grads = Eigen::VectorXd::Ones(state.range(0));
  for (auto _ : state) {
    const cltr::ForwardResult fwd = cltr::forward(params, x);
    benchmark::DoNotOptimize(cltr::backward(fwd.cache, grads));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Arg(256)->Arg(2560)->Unit(benchmark::kMillisecond);

void BM_SgdStep(benchmark::State& state) {
  cltr::MlpParams params = cltr::init_params(64, 1);
  const cltr::MlpGrads grads = cltr::zeros_like(params);
  for (auto _ : state) {
    params = cltr::apply_update(params, grads, 0.01);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_SgdStep)->Unit(benchmark::kMicrosecond);

}  // namespace
