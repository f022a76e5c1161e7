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

#include <array>
#include <cmath>

#include "cltr/error.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/random.hpp"

namespace cltr {

std::vector<QueryGroup> make_toy_groups(const ToyDatasetOptions& options,
                                        std::string_view id_prefix) {
  if (options.feature_dim < 1 || options.min_docs < 2 ||
      options.max_docs < options.min_docs || options.num_queries < 1) {
    throw ArgumentError("invalid toy dataset options");
  }
  // The projection is shared by every split generated with the same seed.
  Random projection_rng(derive_seed(options.seed, "projection"));
  std::vector<double> direction(static_cast<std::size_t>(options.feature_dim));
  double norm = 0.0;
  for (double& w : direction) {
    w = projection_rng.normal();
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (double& w : direction) w /= norm;

  // Latent-score cut points for grades 1..4.
  constexpr std::array<double, 4> kThresholds = {-0.7, 0.4, 1.3, 2.0};

  Random rng(derive_seed(options.seed, id_prefix));
  std::vector<QueryGroup> groups;
  for (int q = 0; q < options.num_queries; ++q) {
    QueryGroup group;
    group.query_id = std::string(id_prefix) + std::to_string(q + 1);
    const int span = options.max_docs - options.min_docs + 1;
    const int n_docs =
        options.min_docs + static_cast<int>(rng.index(static_cast<std::size_t>(span)));
    const double query_shift = 0.3 * rng.normal();
    for (int d = 0; d < n_docs; ++d) {
      Document doc;
      doc.doc_index = d;
      doc.features.resize(direction.size());
      double projection = 0.0;
      for (std::size_t f = 0; f < direction.size(); ++f) {
        // Quantized so the text form is short and exact.
        doc.features[f] = std::round(rng.normal() * 1e4) / 1e4;
        projection += direction[f] * doc.features[f];
      }
      const double latent =
          projection + query_shift + options.label_noise * rng.normal();
      for (const double cut : kThresholds) doc.label += latent > cut ? 1 : 0;
      group.documents.push_back(std::move(doc));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

}  // namespace cltr
