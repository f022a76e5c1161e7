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

#include "cltr/cltr_train.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <unordered_map>

#include "cltr/error.hpp"
#include "cltr/eval_metrics.hpp"
#include "cltr/random.hpp"
#include "cltr/text.hpp"

namespace cltr {
namespace {

constexpr int kValidationCutoff = 5;

struct NamedKind {
  LossKind kind;
  const char* name;
};

constexpr std::array<NamedKind, 11> kKindNames = {{
    {LossKind::kClickPoint, "ClickPoint"},
    {LossKind::kClickPair, "ClickPair"},
    {LossKind::kClickSoftmax, "ClickSoftmax"},
    {LossKind::kIpsPbmEm, "IPS_PBM_EM"},
    {LossKind::kIpsPbmReg, "IPS_PBM_Reg"},
    {LossKind::kIpsDcm, "IPS_DCM"},
    {LossKind::kPrsPbmEm, "PRS_PBM_EM"},
    {LossKind::kPrsPbmReg, "PRS_PBM_Reg"},
    {LossKind::kPrsDcm, "PRS_DCM"},
    {LossKind::kDlaPbm, "DLA_PBM"},
    {LossKind::kDlaDcm, "DLA_DCM"},
}};

bool is_ips(LossKind kind) {
  return kind == LossKind::kIpsPbmEm || kind == LossKind::kIpsPbmReg ||
         kind == LossKind::kIpsDcm;
}

bool is_prs(LossKind kind) {
  return kind == LossKind::kPrsPbmEm || kind == LossKind::kPrsPbmReg ||
         kind == LossKind::kPrsDcm;
}

Eigen::VectorXd click_vector(const Session& session) {
  Eigen::VectorXd clicks(session.length);
  for (int i = 0; i < session.length; ++i) {
    clicks[i] = session.clicks[static_cast<std::size_t>(i)];
  }
  return clicks;
}

void check_finite_loss(double loss, long step) {
  if (!std::isfinite(loss)) throw TrainingError("non-finite loss", step);
}

// Shared step / validation / checkpoint-selection loop. `step_fn` advances
// `params` by one SGD step and returns the batch loss.
TrainResult run_training(const TrainConfig& config, MlpParams params,
                         const std::vector<QueryGroup>& valid,
                         const std::function<double(long, MlpParams&)>& step_fn,
                         const std::function<void()>& on_new_best = {}) {
  TrainResult result;
  result.params = params;
  result.best_step = 0;
  result.best_valid_ndcg5 = mean_ndcg(params, valid, kValidationCutoff);
  result.metrics.push_back(MetricsRow{0, 0.0, result.best_valid_ndcg5});
  if (on_new_best) on_new_best();

  double loss_sum = 0.0;
  long loss_count = 0;
  for (long step = 1; step <= config.steps; ++step) {
    const double loss = step_fn(step, params);
    check_finite_loss(loss, step);
    loss_sum += loss;
    ++loss_count;
    if (step % config.eval_every != 0 && step != config.steps) continue;

    const double ndcg5 = mean_ndcg(params, valid, kValidationCutoff);
    result.metrics.push_back(MetricsRow{step, loss_sum / static_cast<double>(loss_count), ndcg5});
    loss_sum = 0.0;
    loss_count = 0;
    if (ndcg5 > result.best_valid_ndcg5) {
      result.best_valid_ndcg5 = ndcg5;
      result.best_step = step;
      result.params = params;
      if (on_new_best) on_new_best();
    }
  }
  return result;
}

std::vector<const QueryGroup*> resolve_groups(const ClickLog& log,
                                              const std::vector<QueryGroup>& groups) {
  std::unordered_map<std::string, const QueryGroup*> by_id;
  for (const QueryGroup& group : groups) by_id.emplace(group.query_id, &group);
  std::vector<const QueryGroup*> resolved;
  resolved.reserve(log.query_ids.size());
  for (const std::string& id : log.query_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ArgumentError("click log query " + id + " has no query group");
    }
    resolved.push_back(it->second);
  }
  return resolved;
}

int feature_dim_of(const std::vector<QueryGroup>& groups) {
  for (const QueryGroup& group : groups) {
    if (!group.documents.empty()) {
      return static_cast<int>(group.documents.front().features.size());
    }
  }
  throw ArgumentError("no documents to infer the feature dimension from");
}

std::vector<const Session*> sample_sessions(const ClickLog& log, int batch_size,
                                            Random& rng) {
  std::vector<const Session*> picked(static_cast<std::size_t>(batch_size));
  for (auto& session : picked) session = &log.sessions[rng.index(log.sessions.size())];
  return picked;
}

}  // namespace

std::string to_string(LossKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "?";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (name == entry.name) return entry.kind;
  }
  throw ConfigError("unknown loss kind '" + std::string(name) + "'");
}

PropensitySource propensity_source(LossKind kind) {
  switch (kind) {
    case LossKind::kIpsPbmEm:
    case LossKind::kPrsPbmEm:
      return PropensitySource::kPbmEm;
    case LossKind::kIpsPbmReg:
    case LossKind::kPrsPbmReg:
      return PropensitySource::kPbmRegression;
    case LossKind::kIpsDcm:
    case LossKind::kPrsDcm:
      return PropensitySource::kDcmMle;
    case LossKind::kDlaPbm:
    case LossKind::kDlaDcm:
      return PropensitySource::kLearned;
    default:
      return PropensitySource::kNone;
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(propensity_floor > 0.0 && propensity_floor <= 1.0)) {
    throw ConfigError("propensity_floor must lie in (0, 1]");
  }
  for (const int units : hidden) {
    if (units < 1) throw ConfigError("hidden sizes must be >= 1");
  }
}

std::string TrainResult::metrics_csv() const {
  std::string out = "step,train_loss,valid_ndcg5\n";
  for (const MetricsRow& row : metrics) {
    out += std::to_string(row.step) + "," + format_double(row.train_loss) + "," +
           format_double(row.valid_ndcg5) + "\n";
  }
  return out;
}

std::vector<int> examination_contexts(const Session& session, ClickModel model) {
  std::vector<int> contexts(session.length, 0);
  if (model == ClickModel::kPbm) {
    for (int i = 0; i < session.length; ++i) contexts[static_cast<std::size_t>(i)] = i;
    return contexts;
  }
  if (model != ClickModel::kDcm) {
    throw ArgumentError("dual learning supports PBM and DCM examination models");
  }
  int last_click_rank = 0;
  for (int i = 0; i < session.length; ++i) {
    contexts[static_cast<std::size_t>(i)] = last_click_rank;
    if (session.clicks[static_cast<std::size_t>(i)]) last_click_rank = i + 1;
  }
  return contexts;
}

SessionBatch make_batch(std::span<const Session* const> sessions,
                        std::span<const QueryGroup* const> groups_by_query) {
  SessionBatch batch;
  batch.sessions.assign(sessions.begin(), sessions.end());
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (const Session* session : sessions) {
    rows += session->length;
    const QueryGroup& group = *groups_by_query[session->query];
    if (!group.documents.empty()) {
      cols = static_cast<Eigen::Index>(group.documents.front().features.size());
    }
  }
  batch.features.resize(rows, cols);
  Eigen::Index row = 0;
  for (const Session* session : sessions) {
    const QueryGroup& group = *groups_by_query[session->query];
    for (int i = 0; i < session->length; ++i) {
      const auto doc = static_cast<std::size_t>(session->ordering[static_cast<std::size_t>(i)]);
      if (doc >= group.documents.size()) {
        throw ArgumentError("session references a missing document of query " +
                            group.query_id);
      }
      const FeatureVector& f = group.documents[doc].features;
      batch.features.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), cols);
    }
  }
  return batch;
}

BatchGradient dla_gradient(const DlaState& state, const SessionBatch& batch,
                           double weight_cap) {
  auto snapshot = std::make_shared<const MlpParams>(state.ranker);
  const ForwardResult fwd = forward(snapshot, batch.features);
  Eigen::VectorXd score_grads = Eigen::VectorXd::Zero(fwd.scores.size());
  BatchGradient result;
  const double inv_batch =
      batch.sessions.empty() ? 0.0 : 1.0 / static_cast<double>(batch.sessions.size());

  Eigen::Index offset = 0;
  for (const Session* session : batch.sessions) {
    const Eigen::Index n = session->length;
    const Eigen::VectorXd scores = fwd.scores.segment(offset, n);
    const Eigen::VectorXd clicks = click_vector(*session);
    const std::vector<int> contexts = examination_contexts(*session, state.propensity_model);

    // Ranker: clicks reweighted by the inverse estimated examination.
    const Eigen::VectorXd inv_exam =
        dla_inverse_examination(state.position_logits, contexts, weight_cap);
    const LossResult ranker = loss_weighted_softmax(
        scores, (clicks.array() * inv_exam.array()).matrix());
    score_grads.segment(offset, n) = ranker.score_grads * inv_batch;

    // Examination model: clicks reweighted by the inverse estimated relevance.
    const Eigen::VectorXd inv_rel = dla_inverse_relevance(scores, weight_cap);
    const PropensityLossResult exam = loss_dla_propensity(
        state.position_logits, contexts, (clicks.array() * inv_rel.array()).matrix());
    for (std::size_t c = 0; c < result.logits.size(); ++c) {
      result.logits[c] += exam.logit_grads[c] * inv_batch;
    }
    result.loss += (ranker.loss + exam.loss) * inv_batch;
    offset += n;
  }
  result.ranker = backward(fwd.cache, score_grads);
  return result;
}

DlaState dla_step(const DlaState& state, const SessionBatch& batch,
                  double learning_rate, double weight_cap, long step,
                  double* batch_loss) {
  const BatchGradient grad = dla_gradient(state, batch, weight_cap);
  DlaState next;
  next.propensity_model = state.propensity_model;
  next.ranker = apply_update(state.ranker, grad.ranker, learning_rate, step);
  for (std::size_t c = 0; c < grad.logits.size(); ++c) {
    if (!std::isfinite(grad.logits[c])) {
      throw TrainingError("non-finite examination gradient", step);
    }
    next.position_logits[c] = state.position_logits[c] - learning_rate * grad.logits[c];
  }
  if (batch_loss != nullptr) *batch_loss = grad.loss;
  return next;
}

BatchGradient click_loss_gradient(LossKind kind, std::shared_ptr<const MlpParams> params,
                                  const SessionBatch& batch,
                                  const PropensityTable* propensities) {
  if ((is_ips(kind) || is_prs(kind)) && propensities == nullptr) {
    throw ConfigError(to_string(kind) + " requires a propensity table");
  }
  const ForwardResult fwd = forward(std::move(params), batch.features);
  Eigen::VectorXd score_grads = Eigen::VectorXd::Zero(fwd.scores.size());
  BatchGradient result;
  const double inv_batch =
      batch.sessions.empty() ? 0.0 : 1.0 / static_cast<double>(batch.sessions.size());

  Eigen::Index offset = 0;
  for (const Session* session : batch.sessions) {
    const Eigen::Index n = session->length;
    const Eigen::VectorXd scores = fwd.scores.segment(offset, n);
    const Eigen::VectorXd clicks = click_vector(*session);
    Eigen::VectorXd props;
    if (is_ips(kind) || is_prs(kind)) {
      props.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        props[i] = session_propensity(*session, static_cast<int>(i) + 1, *propensities);
      }
    }
    LossResult part;
    switch (kind) {
      case LossKind::kClickPoint:
        part = loss_click_point(scores, clicks);
        break;
      case LossKind::kClickPair:
        part = loss_click_pair(scores, clicks);
        break;
      case LossKind::kClickSoftmax:
        part = loss_click_softmax(scores, clicks);
        break;
      case LossKind::kIpsPbmEm:
      case LossKind::kIpsPbmReg:
      case LossKind::kIpsDcm:
        part = loss_ips_softmax(scores, clicks, props);
        break;
      case LossKind::kPrsPbmEm:
      case LossKind::kPrsPbmReg:
      case LossKind::kPrsDcm:
        part = loss_prs_pairwise(scores, clicks, props, lambda_weights(scores, clicks));
        break;
      default:
        throw ConfigError(to_string(kind) + " is trained with dla_gradient");
    }
    score_grads.segment(offset, n) = part.score_grads * inv_batch;
    result.loss += part.loss * inv_batch;
    offset += n;
  }
  result.ranker = backward(fwd.cache, score_grads);
  return result;
}

TrainResult train_cltr(const TrainConfig& config, LossKind kind,
                       const ClickLog& log, const std::vector<QueryGroup>& groups,
                       const std::vector<QueryGroup>& valid,
                       const PropensityTable* propensities) {
  config.validate();
  if ((is_ips(kind) || is_prs(kind)) && propensities == nullptr) {
    throw ConfigError(to_string(kind) + " requires a propensity table");
  }
  if (log.sessions.empty() && config.steps > 0) {
    throw ArgumentError("cannot train on an empty click log");
  }
  const std::vector<const QueryGroup*> by_query = resolve_groups(log, groups);
  MlpParams initial =
      init_params(feature_dim_of(groups), derive_seed(config.seed, "init"), config.hidden);
  Random rng(derive_seed(config.seed, "batches"));
  const double weight_cap = 1.0 / config.propensity_floor;

  if (kind == LossKind::kDlaPbm || kind == LossKind::kDlaDcm) {
    DlaState state;
    state.propensity_model = kind == LossKind::kDlaPbm ? ClickModel::kPbm : ClickModel::kDcm;
    PositionLogits best_logits{};
    TrainResult result = run_training(
        config, std::move(initial), valid,
        [&](long step, MlpParams& params) {
          const auto sessions = sample_sessions(log, config.batch_size, rng);
          state.ranker = std::move(params);
          double loss = 0.0;
          state = dla_step(state, make_batch(sessions, by_query), config.learning_rate,
                           weight_cap, step, &loss);
          params = state.ranker;
          return loss;
        },
        [&] { best_logits = state.position_logits; });
    std::array<double, kDisplayCutoff> learned{};
    for (std::size_t c = 0; c < learned.size(); ++c) {
      learned[c] = std::exp(best_logits[c] - best_logits[0]);
    }
    result.learned_propensity = learned;
    return result;
  }

  return run_training(config, std::move(initial), valid, [&](long step, MlpParams& params) {
    const auto sessions = sample_sessions(log, config.batch_size, rng);
    auto snapshot = std::make_shared<const MlpParams>(std::move(params));
    const BatchGradient grad =
        click_loss_gradient(kind, snapshot, make_batch(sessions, by_query), propensities);
    params = apply_update(*snapshot, grad.ranker, config.learning_rate, step);
    return grad.loss;
  });
}

TrainResult train_production_ranker(const TrainConfig& config,
                                    const std::vector<QueryGroup>& train,
                                    const std::vector<QueryGroup>& valid) {
  config.validate();
  if (train.empty()) throw ArgumentError("cannot train a ranker on zero queries");
  MlpParams initial =
      init_params(feature_dim_of(train), derive_seed(config.seed, "init"), config.hidden);
  Random rng(derive_seed(config.seed, "batches"));

  return run_training(config, std::move(initial), valid, [&](long step, MlpParams& params) {
    std::vector<const QueryGroup*> picked(static_cast<std::size_t>(config.batch_size));
    Eigen::Index rows = 0;
    for (auto& group : picked) {
      group = &train[rng.index(train.size())];
      rows += static_cast<Eigen::Index>(group->documents.size());
    }
    Eigen::MatrixXd features(rows, initial.feature_dim);
    Eigen::Index row = 0;
    for (const QueryGroup* group : picked) {
      const Eigen::Index n = static_cast<Eigen::Index>(group->documents.size());
      features.middleRows(row, n) = feature_matrix(*group);
      row += n;
    }
    auto snapshot = std::make_shared<const MlpParams>(std::move(params));
    const ForwardResult fwd = forward(snapshot, features);
    Eigen::VectorXd score_grads(rows);
    const double inv_batch = 1.0 / static_cast<double>(picked.size());
    double loss = 0.0;
    row = 0;
    for (const QueryGroup* group : picked) {
      const Eigen::Index n = static_cast<Eigen::Index>(group->documents.size());
      std::vector<int> labels;
      labels.reserve(static_cast<std::size_t>(n));
      for (const Document& doc : group->documents) labels.push_back(doc.label);
      const LossResult part = loss_graded_softmax(fwd.scores.segment(row, n), labels);
      score_grads.segment(row, n) = part.score_grads * inv_batch;
      loss += part.loss * inv_batch;
      row += n;
    }
    params = apply_update(*snapshot, backward(fwd.cache, score_grads),
                          config.learning_rate, step);
    return loss;
  });
}

}  // namespace cltr
