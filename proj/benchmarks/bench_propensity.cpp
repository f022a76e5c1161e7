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

#include "cltr/click_sim.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/propensity_est.hpp"

namespace {

cltr::ClickLog make_log(cltr::ClickModel model, int sessions) {
  cltr::ToyDatasetOptions options;
  options.num_queries = 50;
  const auto groups = cltr::make_toy_groups(options, "b");
  std::vector<cltr::RankedList> rankings;
  for (const auto& group : groups) {
    cltr::RankedList list;
    list.query_id = group.query_id;
    for (std::size_t d = 0; d < group.documents.size(); ++d) {
      list.ordering.push_back(static_cast<int>(d));
    }
    rankings.push_back(std::move(list));
  }
  return cltr::generate_log(groups, rankings, sessions, cltr::SimParams::defaults(model), 3);
}

void BM_EmPbm(benchmark::State& state) {
  const cltr::ClickLog log = make_log(cltr::ClickModel::kPbm, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::em_pbm(log));
  }
}
BENCHMARK(BM_EmPbm)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MleDcm(benchmark::State& state) {
  const cltr::ClickLog log = make_log(cltr::ClickModel::kDcm, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::mle_dcm(log));
  }
}
BENCHMARK(BM_MleDcm)->Arg(200)->Unit(benchmark::kMicrosecond);

}  // namespace
