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

#ifndef CLTR_CLICK_SIM_HPP_
#define CLTR_CLICK_SIM_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cltr/letor_data.hpp"
#include "cltr/mlp_ranker.hpp"
#include "cltr/random.hpp"
#include "cltr/ranking.hpp"

namespace cltr {

enum class ClickModel { kPbm, kDcm, kCbcm };

std::string to_string(ClickModel model);
ClickModel click_model_from_string(std::string_view name);

// User-model parameters. Fields that a model does not use are ignored.
struct SimParams {
  ClickModel model = ClickModel::kPbm;
  double epsilon = 0.1;  // click noise for PBM / DCM
  double eta = 1.0;      // position-bias severity
  double beta = 0.6;     // DCM continuation scale
  double g = 6.6;        // CBCM no-click (viewport advance) log-weight
  double w = 0.4;        // CBCM leave-after-click scale
  int viewport_size = 2;

  // Defaults used for each model: PBM eta=1; DCM beta=0.6, eta=1;
  // CBCM g=6.6, eta=0.75, w=0.4, viewport 2. Epsilon is 0.1 throughout.
  static SimParams defaults(ClickModel model);
  void validate() const;

  bool operator==(const SimParams&) const = default;
};

// One simulated visit to a displayed top-k list.
struct Session {
  std::uint32_t query = 0;  // index into ClickLog::query_ids
  std::uint8_t length = 0;  // displayed positions
  std::array<std::int32_t, kDisplayCutoff> ordering{};
  std::array<std::uint8_t, kDisplayCutoff> clicks{};

  int click_count() const;
  std::span<const std::int32_t> displayed() const { return {ordering.data(), length}; }
  std::span<const std::uint8_t> click_bits() const { return {clicks.data(), length}; }

  bool operator==(const Session&) const = default;
};

struct ClickLog {
  std::vector<std::string> query_ids;
  std::vector<Session> sessions;
  int sessions_per_query = 0;
  SimParams sim_params;
  std::uint64_t seed = 0;

  const std::string& query_id(const Session& session) const {
    return query_ids.at(session.query);
  }
  bool operator==(const ClickLog&) const = default;
};

// P(r = 1) = eps + (1 - eps) (2^y - 1) / (2^4 - 1).
double perceived_relevance_prob(int label, double epsilon);

// (1 / rank)^eta; rank is 1-based.
double pbm_exam_prob(int rank, double eta);

// DCM examination probability after a click at `last_click_rank`:
// beta * (1 / rank)^eta.
double dcm_continuation_prob(int last_click_rank, double beta, double eta);

struct ViewportDoc {
  int label = 0;
  int rank = 1;  // 1-based position in the displayed list
  bool clicked = false;
};

struct CbcmDistribution {
  std::vector<double> click;  // one entry per viewport document
  double no_click = 0.0;
};

// Softmax over exp(y + (1/rank)^eta - 4 [clicked]) for each viewport document
// plus exp(g) for "no click".
CbcmDistribution cbcm_click_distribution(std::span<const ViewportDoc> viewport,
                                         const SimParams& params);

// Simulates one session over labels in display order (1 to 10 entries).
std::vector<std::uint8_t> simulate_session(const SimParams& params,
                                           std::span<const int> displayed_labels,
                                           Random& rng);

// Ranks every group with `ranker`, truncates to the display cutoff and
// simulates `sessions_per_query` sessions per query. Each query draws from a
// substream keyed by (seed, query_id).
ClickLog generate_log(const std::vector<QueryGroup>& groups,
                      const MlpParams& ranker, int sessions_per_query,
                      const SimParams& params, std::uint64_t seed);

// As generate_log with precomputed rankings (one per group, same order).
ClickLog generate_log(const std::vector<QueryGroup>& groups,
                      const std::vector<RankedList>& rankings,
                      int sessions_per_query, const SimParams& params,
                      std::uint64_t seed);

// Line-oriented text form: a `#` header block with the simulation
// parameters, then `query_id,ranking,clicks` rows with `|`-separated lists.
std::string click_log_to_text(const ClickLog& log);
ClickLog click_log_from_text(const std::string& text);

}  // namespace cltr

#endif  // CLTR_CLICK_SIM_HPP_
