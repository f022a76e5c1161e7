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

#ifndef CLTR_RANKING_HPP_
#define CLTR_RANKING_HPP_

#include <span>
#include <string>
#include <vector>

namespace cltr {

// Number of top positions shown to a simulated user.
inline constexpr int kDisplayCutoff = 10;

// A query's documents in presentation order (doc_index values).
struct RankedList {
  std::string query_id;
  std::vector<int> ordering;
  int display_cutoff = kDisplayCutoff;

  int displayed_length() const {
    return static_cast<int>(ordering.size()) < display_cutoff
               ? static_cast<int>(ordering.size())
               : display_cutoff;
  }
};

// Indices sorted by descending score; ties go to the smaller index.
std::vector<int> order_by_score(std::span<const double> scores);

}  // namespace cltr

#endif  // CLTR_RANKING_HPP_
