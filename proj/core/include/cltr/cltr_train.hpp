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

#ifndef CLTR_CLTR_TRAIN_HPP_
#define CLTR_CLTR_TRAIN_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cltr/click_sim.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/losses.hpp"
#include "cltr/mlp_ranker.hpp"
#include "cltr/propensity_est.hpp"

namespace cltr {

enum class LossKind {
  kClickPoint,
  kClickPair,
  kClickSoftmax,
  kIpsPbmEm,
  kIpsPbmReg,
  kIpsDcm,
  kPrsPbmEm,
  kPrsPbmReg,
  kPrsDcm,
  kDlaPbm,
  kDlaDcm,
};

inline constexpr std::array<LossKind, 11> kAllLossKinds = {
    LossKind::kClickPoint, LossKind::kClickPair, LossKind::kClickSoftmax,
    LossKind::kIpsPbmEm,   LossKind::kIpsPbmReg, LossKind::kIpsDcm,
    LossKind::kPrsPbmEm,   LossKind::kPrsPbmReg, LossKind::kPrsDcm,
    LossKind::kDlaPbm,     LossKind::kDlaDcm,
};

// Report names: ClickPoint, ..., IPS_PBM_EM, ..., DLA_DCM.
std::string to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

enum class PropensitySource { kNone, kPbmEm, kPbmRegression, kDcmMle, kLearned };

// Where the propensities of `kind` come from.
PropensitySource propensity_source(LossKind kind);

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 256;
  long steps = 10000;
  std::uint64_t seed = 1;
  long eval_every = 500;
  std::vector<int> hidden = {512, 256, 128};
  double propensity_floor = kDefaultPropensityFloor;  // DLA weight cap 1/floor

  void validate() const;
};

struct MetricsRow {
  long step = 0;
  double train_loss = 0.0;  // mean batch loss since the previous row
  double valid_ndcg5 = 0.0;
};

struct TrainResult {
  MlpParams params;  // best validation checkpoint
  long best_step = 0;
  double best_valid_ndcg5 = 0.0;
  std::vector<MetricsRow> metrics;
  // DLA only: learned examination relative to context 0, per context.
  std::optional<std::array<double, kDisplayCutoff>> learned_propensity;

  // `step,train_loss,valid_ndcg5` rows.
  std::string metrics_csv() const;
};

// Jointly learned ranker and examination model.
struct DlaState {
  MlpParams ranker;
  PositionLogits position_logits{};
  ClickModel propensity_model = ClickModel::kPbm;
};

// Examination context of every displayed position of `session`.
std::vector<int> examination_contexts(const Session& session, ClickModel model);

// Sessions paired with the features of their displayed documents.
struct SessionBatch {
  std::vector<const Session*> sessions;
  Eigen::MatrixXd features;  // stacked displayed documents, session by session
};

// Gathers feature rows for `sessions`; `groups_by_query` is indexed like
// ClickLog::query_ids.
SessionBatch make_batch(std::span<const Session* const> sessions,
                        std::span<const QueryGroup* const> groups_by_query);

// Mean per-session loss over a batch and its gradient.
struct BatchGradient {
  double loss = 0.0;
  MlpGrads ranker;
  PositionLogits logits{};  // dual learning only
};

// Loss and ranker gradient of a click-based kind (every kind but DLA).
// IPS/PRS kinds read `propensities`; the PRS |delta nDCG| weights are
// computed from the current scores and held constant.
BatchGradient click_loss_gradient(LossKind kind, std::shared_ptr<const MlpParams> params,
                                  const SessionBatch& batch,
                                  const PropensityTable* propensities = nullptr);

// Dual learning gradient for the ranker and the position logits. Each side
// treats the other's inverse weights as constants.
BatchGradient dla_gradient(const DlaState& state, const SessionBatch& batch,
                           double weight_cap);

// One SGD step of dual learning on a batch; losses are averaged over the
// batch's sessions. Throws TrainingError on a non-finite update.
DlaState dla_step(const DlaState& state, const SessionBatch& batch,
                  double learning_rate, double weight_cap, long step = -1,
                  double* batch_loss = nullptr);

// Trains a CLTR ranker from clicks. IPS/PRS kinds read `propensities`
// (ConfigError when missing); DLA kinds learn their own. Every `eval_every`
// steps the ranker is scored by nDCG@5 on `valid` and the best checkpoint
// is returned.
TrainResult train_cltr(const TrainConfig& config, LossKind kind,
                       const ClickLog& log, const std::vector<QueryGroup>& groups,
                       const std::vector<QueryGroup>& valid,
                       const PropensityTable* propensities = nullptr);

// Supervised listwise training on graded labels; used for production
// rankers and the skyline. Batches are query groups sampled with
// replacement.
TrainResult train_production_ranker(const TrainConfig& config,
                                    const std::vector<QueryGroup>& train,
                                    const std::vector<QueryGroup>& valid);

}  // namespace cltr

#endif  // CLTR_CLTR_TRAIN_HPP_
