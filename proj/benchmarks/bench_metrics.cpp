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

#include "cltr/eval_metrics.hpp"
#include "cltr/random.hpp"

namespace {

void BM_NdcgAtK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  cltr::Random rng(9);
  std::vector<int> labels(n);
  for (int& y : labels) y = static_cast<int>(rng.index(5));
  cltr::RankedList ranking;
  for (std::size_t i = 0; i < n; ++i) ranking.ordering.push_back(static_cast<int>(i));
  rng.shuffle(ranking.ordering);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::ndcg_at_k(ranking, labels, 10));
  }
}
BENCHMARK(BM_NdcgAtK)->Arg(10)->Arg(40)->Arg(1000);

}  // namespace
