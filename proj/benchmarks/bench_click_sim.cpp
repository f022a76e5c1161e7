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
#include "cltr/random.hpp"

namespace {

const std::vector<cltr::QueryGroup>& groups() {
  static const std::vector<cltr::QueryGroup> toy = [] {
    cltr::ToyDatasetOptions options;
    options.num_queries = 50;
    return cltr::make_toy_groups(options, "b");
  }();
  return toy;
}

std::vector<cltr::RankedList> identity_rankings() {
  std::vector<cltr::RankedList> rankings;
  for (const auto& group : groups()) {
    cltr::RankedList list;
    list.query_id = group.query_id;
    for (std::size_t d = 0; d < group.documents.size(); ++d) {
      list.ordering.push_back(static_cast<int>(d));
    }
    rankings.push_back(std::move(list));
  }
  return rankings;
}

void BM_GenerateLog(benchmark::State& state) {
  const auto model = static_cast<cltr::ClickModel>(state.range(0));
  const cltr::SimParams params = cltr::SimParams::defaults(model);
  const auto rankings = identity_rankings();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::generate_log(groups(), rankings, 100, params, 7));
  }
  state.SetItemsProcessed(state.iterations() * 100 * static_cast<long>(groups().size()));
  state.SetLabel(cltr::to_string(model));
}
BENCHMARK(BM_GenerateLog)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_ClickLogRoundTrip(benchmark::State& state) {
  const cltr::ClickLog log = cltr::generate_log(
      groups(), identity_rankings(), 20, cltr::SimParams::defaults(cltr::ClickModel::kPbm), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cltr::click_log_from_text(cltr::click_log_to_text(log)));
  }
}
BENCHMARK(BM_ClickLogRoundTrip)->Unit(benchmark::kMillisecond);

}  // namespace
