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

#include "cltr/propensity_est.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "cltr/error.hpp"
#include "cltr/losses.hpp"
#include "cltr/random.hpp"
#include "cltr/text.hpp"

namespace cltr {
namespace {

double skip_denominator(double exam, double attraction) {
  return std::max(1.0 - exam * attraction, 1e-12);
}

void require_sessions(const ClickLog& log) {
  if (log.sessions.empty()) throw EstimationError("click log has no sessions");
}

}  // namespace

std::string to_string(PropensityKind kind) {
  return kind == PropensityKind::kPbmRho ? "PBM_rho" : "DCM_lambda";
}

double PropensityTable::at_rank(int rank) const {
  if (rank < 1 || rank > kDisplayCutoff) {
    throw ArgumentError("rank out of range: " + std::to_string(rank));
  }
  return std::max(values[static_cast<std::size_t>(rank - 1)], floor);
}

std::string PropensityTable::to_csv() const {
  std::string out;
  out += "# kind=" + to_string(kind) + "\n";
  out += "# floor=" + format_double(floor) + "\n";
  out += "# source_checksum=" + source_checksum + "\n";
  out += "rank,value\n";
  for (int k = 0; k < kDisplayCutoff; ++k) {
    out += std::to_string(k + 1) + "," +
           format_double(values[static_cast<std::size_t>(k)]) + "\n";
  }
  return out;
}

PropensityTable PropensityTable::from_csv(const std::string& text) {
  PropensityTable table;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_number = 0;
  int rows = 0;
  bool seen_columns = false;
  while (std::getline(in, raw)) {
    ++line_number;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw ParseError("malformed header", line_number);
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      if (key == "kind") {
        if (value == "PBM_rho") table.kind = PropensityKind::kPbmRho;
        else if (value == "DCM_lambda") table.kind = PropensityKind::kDcmLambda;
        else throw ParseError("unknown propensity kind", line_number);
      } else if (key == "floor") {
        const auto floor = parse_double(value);
        if (!floor || !(*floor > 0.0)) throw ParseError("floor must be > 0", line_number);
        table.floor = *floor;
      } else if (key == "source_checksum") {
        table.source_checksum = std::string(value);
      } else {
        throw ParseError("unknown header key", line_number);
      }
      continue;
    }
    if (!seen_columns) {
      if (line != "rank,value") throw ParseError("expected header rank,value", line_number);
      seen_columns = true;
      continue;
    }
    const auto fields = split(line, ',');
    const auto rank = fields.size() == 2 ? parse_int(fields[0]) : std::nullopt;
    const auto value = fields.size() == 2 ? parse_double(fields[1]) : std::nullopt;
    if (!rank || !value || *rank != rows + 1 || rows >= kDisplayCutoff) {
      throw ParseError("malformed propensity row", line_number);
    }
    table.values[static_cast<std::size_t>(rows++)] = *value;
  }
  if (rows != kDisplayCutoff) throw ParseError("propensity table needs 10 rows", line_number);
  return table;
}

PropensityTable oracle_pbm_table(double eta, double floor) {
  PropensityTable table;
  table.kind = PropensityKind::kPbmRho;
  table.floor = floor;
  for (int k = 0; k < kDisplayCutoff; ++k) {
    table.values[static_cast<std::size_t>(k)] =
        std::max(pbm_exam_prob(k + 1, eta), floor);
  }
  table.source_checksum = "oracle";
  return table;
}

double session_propensity(const Session& session, int rank,
                          const PropensityTable& table) {
  if (rank < 1 || rank > session.length) {
    throw ArgumentError("rank " + std::to_string(rank) +
                        " outside the displayed prefix of length " +
                        std::to_string(session.length));
  }
  if (table.kind == PropensityKind::kPbmRho) return table.at_rank(rank);
  for (int above = rank - 1; above >= 1; --above) {
    if (session.clicks[static_cast<std::size_t>(above - 1)]) {
      return table.at_rank(above);
    }
  }
  return 1.0;
}

PbmClickStats PbmClickStats::from_log(const ClickLog& log) {
  PbmClickStats stats;
  std::unordered_map<std::uint64_t, std::uint32_t> pair_index;
  std::unordered_map<std::uint64_t, std::size_t> cell_index;
  for (const Session& session : log.sessions) {
    for (int i = 0; i < session.length; ++i) {
      const std::int32_t doc = session.ordering[static_cast<std::size_t>(i)];
      const std::uint64_t pair_key =
          (static_cast<std::uint64_t>(session.query) << 32) |
          static_cast<std::uint32_t>(doc);
      auto [pit, new_pair] = pair_index.emplace(
          pair_key, static_cast<std::uint32_t>(stats.pairs.size()));
      if (new_pair) stats.pairs.emplace_back(session.query, doc);
      const std::uint64_t cell_key =
          static_cast<std::uint64_t>(pit->second) * kDisplayCutoff +
          static_cast<std::uint64_t>(i);
      auto [cit, new_cell] = cell_index.emplace(cell_key, stats.cells.size());
      if (new_cell) stats.cells.push_back(Cell{pit->second, i, 0.0, 0.0});
      Cell& cell = stats.cells[cit->second];
      cell.impressions += 1.0;
      cell.clicks += session.clicks[static_cast<std::size_t>(i)];
    }
  }
  return stats;
}

std::array<double, kDisplayCutoff> pbm_examination_update(
    const PbmClickStats& stats,
    const std::array<double, kDisplayCutoff>& examination,
    const std::vector<double>& attraction) {
  std::array<double, kDisplayCutoff> mass{};
  std::array<double, kDisplayCutoff> count{};
  for (const auto& cell : stats.cells) {
    const double exam = examination[static_cast<std::size_t>(cell.rank_index)];
    const double attr = attraction[cell.pair];
    const double skips = cell.impressions - cell.clicks;
    const auto k = static_cast<std::size_t>(cell.rank_index);
    mass[k] += cell.clicks + skips * exam * (1.0 - attr) / skip_denominator(exam, attr);
    count[k] += cell.impressions;
  }
  std::array<double, kDisplayCutoff> updated = examination;
  for (std::size_t k = 0; k < updated.size(); ++k) {
    if (count[k] > 0.0) updated[k] = mass[k] / count[k];
  }
  return updated;
}

std::vector<double> pbm_attraction_posteriors(
    const PbmClickStats& stats,
    const std::array<double, kDisplayCutoff>& examination,
    const std::vector<double>& attraction) {
  std::vector<double> mass(stats.pairs.size(), 0.0);
  std::vector<double> count(stats.pairs.size(), 0.0);
  for (const auto& cell : stats.cells) {
    const double exam = examination[static_cast<std::size_t>(cell.rank_index)];
    const double attr = attraction[cell.pair];
    const double skips = cell.impressions - cell.clicks;
    mass[cell.pair] +=
        cell.clicks + skips * attr * (1.0 - exam) / skip_denominator(exam, attr);
    count[cell.pair] += cell.impressions;
  }
  for (std::size_t p = 0; p < mass.size(); ++p) {
    mass[p] = count[p] > 0.0 ? mass[p] / count[p] : attraction[p];
  }
  return mass;
}

PbmModel pbm_em_step(const PbmClickStats& stats, const PbmModel& model) {
  PbmModel next;
  next.examination = pbm_examination_update(stats, model.examination, model.attraction);
  next.attraction = pbm_attraction_posteriors(stats, model.examination, model.attraction);
  return next;
}

double pbm_log_likelihood(const PbmClickStats& stats, const PbmModel& model) {
  double total = 0.0;
  for (const auto& cell : stats.cells) {
    const double p = model.examination[static_cast<std::size_t>(cell.rank_index)] *
                     model.attraction[cell.pair];
    if (cell.clicks > 0.0) total += cell.clicks * std::log(std::max(p, 1e-300));
    const double skips = cell.impressions - cell.clicks;
    if (skips > 0.0) total += skips * std::log(std::max(1.0 - p, 1e-300));
  }
  return total;
}

PropensityTable pbm_table_from_examination(
    const std::array<double, kDisplayCutoff>& examination, double floor) {
  if (!(floor > 0.0)) throw ArgumentError("propensity floor must be > 0");
  if (!(examination[0] > 0.0)) {
    throw EstimationError("rank-1 examination estimate is zero");
  }
  PropensityTable table;
  table.kind = PropensityKind::kPbmRho;
  table.floor = floor;
  for (std::size_t k = 0; k < examination.size(); ++k) {
    table.values[k] = std::clamp(examination[k] / examination[0], floor, 1.0);
  }
  return table;
}

PropensityTable em_pbm(const ClickLog& log, const EmOptions& options) {
  require_sessions(log);
  const PbmClickStats stats = PbmClickStats::from_log(log);
  PbmModel initial;
  initial.examination.fill(options.initial_examination);
  initial.attraction.assign(stats.pairs.size(), options.initial_attraction);
  return em_pbm(log, stats, std::move(initial), options);
}

PropensityTable em_pbm(const ClickLog& log, const PbmClickStats& stats,
                       PbmModel model, const EmOptions& options,
                       PbmModel* final_model, int* iterations) {
  require_sessions(log);
  if (model.attraction.size() != stats.pairs.size()) {
    throw ArgumentError("initial attraction size differs from the click stats");
  }
  int done = 0;
  for (; done < options.max_iterations; ++done) {
    PbmModel next = pbm_em_step(stats, model);
    double delta = 0.0;
    for (std::size_t k = 0; k < next.examination.size(); ++k) {
      delta = std::max(delta, std::abs(next.examination[k] - model.examination[k]));
    }
    for (std::size_t p = 0; p < next.attraction.size(); ++p) {
      delta = std::max(delta, std::abs(next.attraction[p] - model.attraction[p]));
    }
    model = std::move(next);
    if (delta < options.tolerance) {
      ++done;
      break;
    }
  }
  if (iterations != nullptr) *iterations = done;
  PropensityTable table = pbm_table_from_examination(model.examination, options.floor);
  if (final_model != nullptr) *final_model = std::move(model);
  return table;
}

std::vector<double> RelevanceRegressor::predict(const Eigen::MatrixXd& features) const {
  const Eigen::VectorXd scores = cltr::predict(net, features);
  std::vector<double> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    out[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-scores[i]));
  }
  return out;
}

RegressionEmResult regression_em_pbm(const ClickLog& log,
                                     const std::vector<QueryGroup>& groups,
                                     const RegressionEmOptions& options) {
  require_sessions(log);
  std::unordered_map<std::string, const QueryGroup*> by_id;
  for (const QueryGroup& group : groups) by_id.emplace(group.query_id, &group);

  const PbmClickStats stats = PbmClickStats::from_log(log);
  int feature_dim = 0;
  std::vector<const FeatureVector*> rows;
  rows.reserve(stats.pairs.size());
  for (const auto& [query, doc] : stats.pairs) {
    const auto it = by_id.find(log.query_ids.at(query));
    if (it == by_id.end()) {
      throw EstimationError("query " + log.query_ids.at(query) +
                            " of the click log has no feature data");
    }
    const auto& documents = it->second->documents;
    if (doc < 0 || static_cast<std::size_t>(doc) >= documents.size()) {
      throw EstimationError("document index out of range in query " + it->second->query_id);
    }
    rows.push_back(&documents[static_cast<std::size_t>(doc)].features);
    feature_dim = static_cast<int>(rows.back()->size());
  }
  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()), feature_dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    features.row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::RowVectorXd>(rows[r]->data(), feature_dim);
  }
  std::vector<double> impressions(stats.pairs.size(), 0.0);
  for (const auto& cell : stats.cells) impressions[cell.pair] += cell.impressions;

  RegressionEmResult result;
  result.regressor = options.initial_regressor
                         ? *options.initial_regressor
                         : RelevanceRegressor{init_params(feature_dim, options.seed,
                                                          options.hidden)};
  std::array<double, kDisplayCutoff> examination;
  examination.fill(options.em.initial_examination);
  Random rng(derive_seed(options.seed, "regression-em"));

  const auto n_pairs = stats.pairs.size();
  const std::size_t batch = std::min<std::size_t>(
      n_pairs, static_cast<std::size_t>(std::max(1, options.fit_batch_size)));
  std::vector<double> prior = result.regressor.predict(features);

  for (int it = 0; it < options.em.max_iterations; ++it) {
    const auto next_exam = pbm_examination_update(stats, examination, prior);
    const auto targets = pbm_attraction_posteriors(stats, examination, prior);

    // Attraction M-step: fit the shared regressor to the posteriors.
    for (int step = 0; step < options.fit_steps_per_iteration; ++step) {
      std::vector<int> picked(batch);
      if (batch == n_pairs) {
        for (std::size_t i = 0; i < batch; ++i) picked[i] = static_cast<int>(i);
      } else {
        for (std::size_t i = 0; i < batch; ++i) picked[i] = static_cast<int>(rng.index(n_pairs));
      }
      Eigen::MatrixXd x(static_cast<Eigen::Index>(batch), feature_dim);
      Eigen::VectorXd t(static_cast<Eigen::Index>(batch));
      Eigen::VectorXd w(static_cast<Eigen::Index>(batch));
      for (std::size_t i = 0; i < batch; ++i) {
        const auto p = static_cast<std::size_t>(picked[i]);
        x.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(p));
        t[static_cast<Eigen::Index>(i)] = targets[p];
        w[static_cast<Eigen::Index>(i)] = impressions[p];
      }
      auto snapshot = std::make_shared<const MlpParams>(result.regressor.net);
      const ForwardResult fwd = forward(snapshot, x);
      const LossResult loss = loss_sigmoid_cross_entropy(fwd.scores, t, w);
      result.regressor.net = apply_update(result.regressor.net,
                                          backward(fwd.cache, loss.score_grads),
                                          options.learning_rate, step);
    }

    std::vector<double> next_prior = result.regressor.predict(features);
    double delta = 0.0;
    for (std::size_t k = 0; k < examination.size(); ++k) {
      delta = std::max(delta, std::abs(next_exam[k] - examination[k]));
    }
    for (std::size_t p = 0; p < n_pairs; ++p) {
      delta = std::max(delta, std::abs(next_prior[p] - prior[p]));
    }
    examination = next_exam;
    prior = std::move(next_prior);
    if (delta < options.em.tolerance) break;
  }
  result.table = pbm_table_from_examination(examination, options.em.floor);
  return result;
}

PropensityTable mle_dcm(const ClickLog& log, double floor) {
  require_sessions(log);
  if (!(floor > 0.0)) throw ArgumentError("propensity floor must be > 0");
  std::array<double, kDisplayCutoff> continued{};
  std::array<double, kDisplayCutoff> clicked{};
  for (const Session& session : log.sessions) {
    int last = -1;
    for (int i = 0; i < session.length; ++i) {
      if (session.clicks[static_cast<std::size_t>(i)]) last = i;
    }
    for (int i = 0; i < session.length; ++i) {
      if (!session.clicks[static_cast<std::size_t>(i)]) continue;
      clicked[static_cast<std::size_t>(i)] += 1.0;
      if (i != last) continued[static_cast<std::size_t>(i)] += 1.0;
    }
  }
  PropensityTable table;
  table.kind = PropensityKind::kDcmLambda;
  table.floor = floor;
  for (std::size_t k = 0; k < table.values.size(); ++k) {
    const double lambda = clicked[k] > 0.0 ? continued[k] / clicked[k] : floor;
    table.values[k] = std::clamp(lambda, floor, 1.0);
  }
  return table;
}

}  // namespace cltr
