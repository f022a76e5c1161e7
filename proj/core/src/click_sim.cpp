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

#include "cltr/click_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cltr/error.hpp"

namespace cltr {
namespace {

constexpr double kMaxGain = 15.0;  // 2^4 - 1
constexpr double kClickedPenalty = 4.0;

double gain(int label) { return std::ldexp(1.0, label) - 1.0; }

void check_label(int label) {
  if (label < 0 || label > kMaxLabel) {
    throw ArgumentError("label out of range [0,4]: " + std::to_string(label));
  }
}

std::vector<std::uint8_t> simulate_pbm(const SimParams& p,
                                       std::span<const int> labels, Random& rng) {
  std::vector<std::uint8_t> clicks(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool examined = rng.bernoulli(pbm_exam_prob(static_cast<int>(i) + 1, p.eta));
    const bool relevant = rng.bernoulli(perceived_relevance_prob(labels[i], p.epsilon));
    clicks[i] = examined && relevant ? 1 : 0;
  }
  return clicks;
}

std::vector<std::uint8_t> simulate_dcm(const SimParams& p,
                                       std::span<const int> labels, Random& rng) {
  std::vector<std::uint8_t> clicks(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!rng.bernoulli(perceived_relevance_prob(labels[i], p.epsilon))) continue;
    clicks[i] = 1;
    const int rank = static_cast<int>(i) + 1;
    if (!rng.bernoulli(dcm_continuation_prob(rank, p.beta, p.eta))) break;
  }
  return clicks;
}

std::vector<std::uint8_t> simulate_cbcm(const SimParams& p,
                                        std::span<const int> labels, Random& rng) {
  const auto n = static_cast<int>(labels.size());
  std::vector<std::uint8_t> clicks(labels.size(), 0);
  const int width = std::min(p.viewport_size, n);
  std::vector<ViewportDoc> viewport(static_cast<std::size_t>(width));

  // The viewport slides down one position per no-click while it fits.
  for (int top = 0; top + width <= n;) {
    for (int k = 0; k < width; ++k) {
      const int position = top + k;
      viewport[static_cast<std::size_t>(k)] =
          ViewportDoc{labels[static_cast<std::size_t>(position)], position + 1,
                      clicks[static_cast<std::size_t>(position)] != 0};
    }
    const CbcmDistribution dist = cbcm_click_distribution(viewport, p);
    double u = rng.uniform();
    int chosen = -1;
    for (int k = 0; k < width; ++k) {
      u -= dist.click[static_cast<std::size_t>(k)];
      if (u < 0.0) {
        chosen = k;
        break;
      }
    }
    if (chosen < 0) {
      ++top;
      continue;
    }
    const int position = top + chosen;
    clicks[static_cast<std::size_t>(position)] = 1;
    const double leave =
        p.w * gain(labels[static_cast<std::size_t>(position)]) / kMaxGain;
    if (rng.bernoulli(leave)) break;
  }
  return clicks;
}

}  // namespace

std::string to_string(ClickModel model) {
  switch (model) {
    case ClickModel::kPbm:
      return "PBM";
    case ClickModel::kDcm:
      return "DCM";
    case ClickModel::kCbcm:
      return "CBCM";
  }
  return "?";
}

ClickModel click_model_from_string(std::string_view name) {
  if (name == "PBM") return ClickModel::kPbm;
  if (name == "DCM") return ClickModel::kDcm;
  if (name == "CBCM") return ClickModel::kCbcm;
  throw ArgumentError("unknown click model '" + std::string(name) + "'");
}

SimParams SimParams::defaults(ClickModel model) {
  SimParams p;
  p.model = model;
  if (model == ClickModel::kCbcm) p.eta = 0.75;
  return p;
}

void SimParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ArgumentError("epsilon must lie in [0,1]");
  if (!(eta >= 0.0)) throw ArgumentError("eta must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("beta must lie in [0,1]");
  if (!(w >= 0.0 && w <= 1.0)) throw ArgumentError("w must lie in [0,1]");
  if (viewport_size < 1) throw ArgumentError("viewport_size must be >= 1");
  if (std::isnan(g)) throw ArgumentError("g must be a number");
}

int Session::click_count() const {
  int count = 0;
  for (std::uint8_t i = 0; i < length; ++i) count += clicks[i];
  return count;
}

double perceived_relevance_prob(int label, double epsilon) {
  check_label(label);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ArgumentError("epsilon must lie in [0,1]");
  }
  return epsilon + (1.0 - epsilon) * gain(label) / kMaxGain;
}

double pbm_exam_prob(int rank, double eta) {
  if (rank < 1) throw ArgumentError("rank must be >= 1, got " + std::to_string(rank));
  return std::pow(1.0 / static_cast<double>(rank), eta);
}

double dcm_continuation_prob(int last_click_rank, double beta, double eta) {
  if (last_click_rank < 1) {
    throw ArgumentError("rank must be >= 1, got " + std::to_string(last_click_rank));
  }
  return beta * std::pow(1.0 / static_cast<double>(last_click_rank), eta);
}

CbcmDistribution cbcm_click_distribution(std::span<const ViewportDoc> viewport,
                                         const SimParams& params) {
  if (viewport.empty()) throw ArgumentError("empty CBCM viewport");
  if (static_cast<int>(viewport.size()) > params.viewport_size) {
    throw ArgumentError("viewport larger than viewport_size");
  }
  std::vector<double> logits;
  logits.reserve(viewport.size());
  double top = params.g;
  for (const ViewportDoc& doc : viewport) {
    check_label(doc.label);
    const double logit = doc.label + pbm_exam_prob(doc.rank, params.eta) -
                         (doc.clicked ? kClickedPenalty : 0.0);
    logits.push_back(logit);
    top = std::max(top, logit);
  }
  // Shifted by the largest logit so huge g cannot overflow.
  CbcmDistribution dist;
  double total = std::exp(params.g - top);
  for (const double logit : logits) total += std::exp(logit - top);
  for (const double logit : logits) dist.click.push_back(std::exp(logit - top) / total);
  dist.no_click = std::exp(params.g - top) / total;
  return dist;
}

std::vector<std::uint8_t> simulate_session(const SimParams& params,
                                           std::span<const int> displayed_labels,
                                           Random& rng) {
  if (displayed_labels.empty()) throw ArgumentError("empty display");
  if (displayed_labels.size() > static_cast<std::size_t>(kDisplayCutoff)) {
    throw ArgumentError("more than 10 displayed documents");
  }
  for (const int label : displayed_labels) check_label(label);
  switch (params.model) {
    case ClickModel::kPbm:
      return simulate_pbm(params, displayed_labels, rng);
    case ClickModel::kDcm:
      return simulate_dcm(params, displayed_labels, rng);
    case ClickModel::kCbcm:
      return simulate_cbcm(params, displayed_labels, rng);
  }
  throw ArgumentError("unknown click model");
}

ClickLog generate_log(const std::vector<QueryGroup>& groups,
                      const MlpParams& ranker, int sessions_per_query,
                      const SimParams& params, std::uint64_t seed) {
  std::vector<RankedList> rankings;
  rankings.reserve(groups.size());
  for (const QueryGroup& group : groups) rankings.push_back(rank_documents(ranker, group));
  return generate_log(groups, rankings, sessions_per_query, params, seed);
}

ClickLog generate_log(const std::vector<QueryGroup>& groups,
                      const std::vector<RankedList>& rankings,
                      int sessions_per_query, const SimParams& params,
                      std::uint64_t seed) {
  if (sessions_per_query < 1) throw ArgumentError("sessions_per_query must be >= 1");
  if (rankings.size() != groups.size()) {
    throw ArgumentError("one ranking per query group is required");
  }
  params.validate();
  ClickLog log;
  log.sessions_per_query = sessions_per_query;
  log.sim_params = params;
  log.seed = seed;
  log.sessions.reserve(groups.size() * static_cast<std::size_t>(sessions_per_query));

  std::vector<int> labels;
  for (std::size_t q = 0; q < groups.size(); ++q) {
    const QueryGroup& group = groups[q];
    const RankedList& ranking = rankings[q];
    log.query_ids.push_back(group.query_id);

    Session shown;
    shown.query = static_cast<std::uint32_t>(q);
    shown.length = static_cast<std::uint8_t>(
        std::min(ranking.displayed_length(), kDisplayCutoff));
    labels.clear();
    for (int i = 0; i < shown.length; ++i) {
      const int doc = ranking.ordering[static_cast<std::size_t>(i)];
      shown.ordering[static_cast<std::size_t>(i)] = doc;
      labels.push_back(group.documents.at(static_cast<std::size_t>(doc)).label);
    }
    if (shown.length == 0) continue;

    Random rng(derive_seed(seed, group.query_id));
    for (int s = 0; s < sessions_per_query; ++s) {
      Session session = shown;
      const auto clicks = simulate_session(params, labels, rng);
      std::copy(clicks.begin(), clicks.end(), session.clicks.begin());
      log.sessions.push_back(session);
    }
  }
  return log;
}

}  // namespace cltr
