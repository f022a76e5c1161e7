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

#ifndef CLTR_LETOR_DATA_HPP_
#define CLTR_LETOR_DATA_HPP_

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace cltr {

inline constexpr int kMaxLabel = 4;

using FeatureVector = std::vector<double>;

struct Document {
  int doc_index = 0;  // position within the query group
  FeatureVector features;
  int label = 0;  // graded relevance in [0, kMaxLabel]

  bool operator==(const Document&) const = default;
};

struct QueryGroup {
  std::string query_id;
  std::vector<Document> documents;

  int max_label() const;
  bool operator==(const QueryGroup&) const = default;
};

struct DatasetSplit {
  std::vector<QueryGroup> train;
  std::vector<QueryGroup> valid;
  std::vector<QueryGroup> test;
  int feature_dim = 0;
};

// Parses LETOR / SVMLight ranking text:
//
//   <label> qid:<id> <fid>:<value> ... [# comment]
//
// Feature ids are 1-based and strictly increasing within a line; missing
// ids read as 0. Consecutive lines with the same qid form one group. When
// `feature_dim` is given, a larger feature id is a parse error; otherwise
// the dimension is the largest id seen in the stream.
std::vector<QueryGroup> parse_letor(std::istream& in,
                                    std::optional<int> feature_dim = {});
std::vector<QueryGroup> parse_letor_file(const std::string& path,
                                         std::optional<int> feature_dim = {});

// Inverse of parse_letor. Zero features are omitted.
std::string serialize_letor(const std::vector<QueryGroup>& groups);

// Keeps groups with at least two documents and at least one label > 0.
std::vector<QueryGroup> filter_queries(std::vector<QueryGroup> groups);

// Draws ceil(fraction * |groups|) whole groups without replacement.
std::vector<QueryGroup> subsample_labeled(const std::vector<QueryGroup>& groups,
                                          double fraction, std::uint64_t seed);

// Per-feature min-max statistics fitted on training groups.
class FeatureScaler {
 public:
  FeatureScaler() = default;
  FeatureScaler(std::vector<double> min, std::vector<double> max);

  static FeatureScaler fit(const std::vector<QueryGroup>& groups);

  // Maps every feature into [0, 1]; constant features map to 0.
  void apply(std::vector<QueryGroup>& groups) const;
  double scale(std::size_t feature, double value) const;

  std::size_t dim() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

  // CSV with header `feature_id,min,max`; feature ids are 1-based.
  std::string to_csv() const;
  static FeatureScaler from_csv(const std::string& text);

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

// Fits the scaler on `groups` and applies it in place.
FeatureScaler normalize_features(std::vector<QueryGroup>& groups);

// Loads, filters and normalizes the three splits. All splits share the
// training scaler. Throws ArgumentError if query ids overlap.
DatasetSplit load_dataset(const std::string& train_path,
                          const std::string& valid_path,
                          const std::string& test_path,
                          std::optional<int> feature_dim = {},
                          FeatureScaler* scaler_out = nullptr);

// Synthetic dataset whose labels are a noisy monotone function of a fixed
// linear projection of the features.
struct ToyDatasetOptions {
  int num_queries = 200;
  int feature_dim = 16;
  int min_docs = 15;
  int max_docs = 40;
  double label_noise = 0.5;
  std::uint64_t seed = 20250713;
};
std::vector<QueryGroup> make_toy_groups(const ToyDatasetOptions& options,
                                        std::string_view id_prefix);

}  // namespace cltr

#endif  // CLTR_LETOR_DATA_HPP_
