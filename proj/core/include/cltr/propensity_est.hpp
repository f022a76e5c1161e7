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

#ifndef CLTR_PROPENSITY_EST_HPP_
#define CLTR_PROPENSITY_EST_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cltr/click_sim.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/mlp_ranker.hpp"

namespace cltr {

inline constexpr double kDefaultPropensityFloor = 0.05;

enum class PropensityKind { kPbmRho, kDcmLambda };

std::string to_string(PropensityKind kind);

// Per-rank examination parameters. For kPbmRho values[k] is the examination
// probability of rank k+1 relative to rank 1; for kDcmLambda values[k] is
// the probability of examining on after a click at rank k+1.
struct PropensityTable {
  PropensityKind kind = PropensityKind::kPbmRho;
  std::array<double, kDisplayCutoff> values{};
  double floor = kDefaultPropensityFloor;
  std::string source_checksum;  // of the click log the table was fitted on

  double at_rank(int rank) const;

  // Header block (`# kind=`, `# floor=`, `# source_checksum=`) followed by
  // `rank,value` rows.
  std::string to_csv() const;
  static PropensityTable from_csv(const std::string& text);
};

// Table with the true PBM examination curve (1/k)^eta.
PropensityTable oracle_pbm_table(double eta, double floor = kDefaultPropensityFloor);

// Examination probability of the document shown at 1-based `rank` in
// `session`. PBM: values[rank]. DCM: 1 before the first click, otherwise
// the lambda of the last click above `rank`. Never below table.floor.
double session_propensity(const Session& session, int rank,
                          const PropensityTable& table);

// ---------------------------------------------------------------------------
// PBM expectation-maximization.

// Click log aggregated into (query, document, rank) cells.
struct PbmClickStats {
  struct Cell {
    std::uint32_t pair = 0;  // index into `pairs`
    int rank_index = 0;      // 0-based rank
    double clicks = 0.0;
    double impressions = 0.0;
  };
  std::vector<std::pair<std::uint32_t, std::int32_t>> pairs;  // (query, doc)
  std::vector<Cell> cells;

  static PbmClickStats from_log(const ClickLog& log);
};

struct PbmModel {
  std::array<double, kDisplayCutoff> examination{};  // unnormalized
  std::vector<double> attraction;                    // one per stats pair
};

struct EmOptions {
  int max_iterations = 50;
  double tolerance = 1e-5;
  double floor = kDefaultPropensityFloor;
  double initial_examination = 0.5;
  double initial_attraction = 0.5;
};

// Examination M-step: each rank's mean posterior P(examined | click data)
// under the given per-pair attraction priors.
std::array<double, kDisplayCutoff> pbm_examination_update(
    const PbmClickStats& stats,
    const std::array<double, kDisplayCutoff>& examination,
    const std::vector<double>& attraction);

// Per-pair mean posterior P(attractive | click data).
std::vector<double> pbm_attraction_posteriors(
    const PbmClickStats& stats,
    const std::array<double, kDisplayCutoff>& examination,
    const std::vector<double>& attraction);

// One full EM iteration.
PbmModel pbm_em_step(const PbmClickStats& stats, const PbmModel& model);

double pbm_log_likelihood(const PbmClickStats& stats, const PbmModel& model);

// Normalizes by rank 1 and clips into [floor, 1].
PropensityTable pbm_table_from_examination(
    const std::array<double, kDisplayCutoff>& examination, double floor);

PropensityTable em_pbm(const ClickLog& log, const EmOptions& options = {});

// EM from an explicit starting point. `final_model` receives the fitted
// model when non-null.
PropensityTable em_pbm(const ClickLog& log, const PbmClickStats& stats,
                       PbmModel initial, const EmOptions& options,
                       PbmModel* final_model = nullptr, int* iterations = nullptr);

// ---------------------------------------------------------------------------
// Regression-EM.

// Feature-based attraction model: sigmoid of a small scoring network.
struct RelevanceRegressor {
  MlpParams net;

  std::vector<double> predict(const Eigen::MatrixXd& features) const;
};

struct RegressionEmOptions {
  EmOptions em;
  std::vector<int> hidden = {32, 16};
  double learning_rate = 0.5;
  int fit_steps_per_iteration = 25;
  int fit_batch_size = 1024;  // pairs per gradient step
  std::uint64_t seed = 7;
  std::optional<RelevanceRegressor> initial_regressor;
};

struct RegressionEmResult {
  PropensityTable table;
  RelevanceRegressor regressor;
};

// EM whose attraction M-step fits one regressor shared across queries to
// the posterior attractions; the regressor's predictions are the attraction
// priors of the next E-step.
RegressionEmResult regression_em_pbm(const ClickLog& log,
                                     const std::vector<QueryGroup>& groups,
                                     const RegressionEmOptions& options = {});

// ---------------------------------------------------------------------------
// DCM.

// lambda_r = (# clicks at rank r followed by a later click in the session) /
// (# clicks at rank r). Ranks without clicks fall back to the floor.
PropensityTable mle_dcm(const ClickLog& log, double floor = kDefaultPropensityFloor);

}  // namespace cltr

#endif  // CLTR_PROPENSITY_EST_HPP_
