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

// Independent DCM simulator that exposes its latent continuation draws, and
// the expected value of the "click followed by a later click" counting
// estimator computed from them.

#ifndef CLTR_TESTS_DCM_ORACLE_HPP_
#define CLTR_TESTS_DCM_ORACLE_HPP_

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

struct DcmSetting {
  double epsilon = 0.1;
  double beta = 0.6;
  double eta = 1.0;
};

inline double attraction(int label, double epsilon) {
  return epsilon + (1.0 - epsilon) * (std::pow(2.0, label) - 1.0) / 15.0;
}

// P(at least one click at positions >= j | position j examined): without a
// click the user always moves on, so this is 1 - prod (1 - a_i).
inline std::vector<double> later_click_prob(const std::vector<int>& labels, double epsilon) {
  std::vector<double> prob(labels.size() + 1, 0.0);
  double none = 1.0;
  for (std::size_t j = labels.size(); j-- > 0;) {
    none *= 1.0 - attraction(labels[j], epsilon);
    prob[j] = 1.0 - none;
  }
  return prob;
}

// Expected counting estimate per rank. For every simulated click at rank k
// the latent continuation draw succeeds with probability lambda_k, after
// which a later click happens with probability later_click_prob[k + 1]; the
// product replaces the observed indicator (Rao-Blackwellization).
inline std::array<double, 10> expected_counting_estimate(
    const std::vector<std::vector<int>>& lists, const DcmSetting& setting, long sessions_per_list,
    unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 10> expected_continued{};
  std::array<double, 10> clicks{};
  for (const auto& labels : lists) {
    const auto later = later_click_prob(labels, setting.epsilon);
    for (long s = 0; s < sessions_per_list; ++s) {
      for (std::size_t k = 0; k < labels.size() && k < 10; ++k) {
        if (u(rng) >= attraction(labels[k], setting.epsilon)) continue;
        const double lambda = setting.beta * std::pow(1.0 / static_cast<double>(k + 1), setting.eta);
        clicks[k] += 1.0;
        expected_continued[k] += lambda * later[k + 1];
        const bool continues = u(rng) < lambda;  // latent state
        if (!continues) break;
      }
    }
  }
  std::array<double, 10> estimate{};
  for (std::size_t k = 0; k < 10; ++k) {
    estimate[k] = clicks[k] > 0.0 ? expected_continued[k] / clicks[k] : 0.0;
  }
  return estimate;
}

}  // namespace oracle

#endif  // CLTR_TESTS_DCM_ORACLE_HPP_
