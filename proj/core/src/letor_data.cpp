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

#include "cltr/letor_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "cltr/error.hpp"
#include "cltr/random.hpp"
#include "cltr/text.hpp"

namespace cltr {
namespace {

struct ParsedLine {
  int label = 0;
  std::string query_id;
  std::vector<std::pair<int, double>> features;  // (1-based id, value)
};

ParsedLine parse_line(std::string_view line, std::size_t line_number,
                      std::optional<int> feature_dim) {
  ParsedLine parsed;
  std::vector<std::string_view> tokens;
  for (std::string_view token : split(line, ' ')) {
    for (std::string_view piece : split(token, '\t')) {
      if (!piece.empty()) tokens.push_back(piece);
    }
  }
  if (tokens.empty()) throw ParseError("missing label", line_number);

  const auto label = parse_int(tokens[0]);
  if (!label) {
    throw ParseError("label is not an integer: '" + std::string(tokens[0]) + "'",
                     line_number);
  }
  if (*label < 0 || *label > kMaxLabel) {
    throw ParseError("label out of range [0,4]: " + std::to_string(*label),
                     line_number);
  }
  parsed.label = static_cast<int>(*label);

  if (tokens.size() < 2 || tokens[1].substr(0, 4) != "qid:" ||
      tokens[1].size() == 4) {
    throw ParseError("missing qid", line_number);
  }
  parsed.query_id = std::string(tokens[1].substr(4));

  int previous_id = 0;
  for (std::size_t t = 2; t < tokens.size(); ++t) {
    const std::string_view token = tokens[t];
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError("malformed feature '" + std::string(token) + "'",
                       line_number);
    }
    const auto id = parse_int(token.substr(0, colon));
    const auto value = parse_double(token.substr(colon + 1));
    if (!id || !value) {
      throw ParseError("non-numeric feature '" + std::string(token) + "'",
                       line_number);
    }
    if (*id < 1) {
      throw ParseError("feature ids are 1-based", line_number);
    }
    if (*id <= previous_id) {
      throw ParseError("feature ids must be strictly increasing", line_number);
    }
    if (feature_dim && *id > *feature_dim) {
      throw ParseError("feature id " + std::to_string(*id) +
                           " exceeds dimension " + std::to_string(*feature_dim),
                       line_number);
    }
    if (!std::isfinite(*value)) {
      throw ParseError("non-finite feature value", line_number);
    }
    previous_id = static_cast<int>(*id);
    parsed.features.emplace_back(previous_id, *value);
  }
  return parsed;
}

}  // namespace

int QueryGroup::max_label() const {
  int best = -1;
  for (const Document& doc : documents) best = std::max(best, doc.label);
  return best;
}

std::vector<QueryGroup> parse_letor(std::istream& in,
                                    std::optional<int> feature_dim) {
  std::vector<QueryGroup> groups;
  std::vector<std::vector<std::pair<int, double>>> sparse;  // per document
  std::unordered_set<std::string> closed_ids;
  int max_id = feature_dim.value_or(0);

  std::string raw;
  std::size_t line_number = 0;
  while (std::getline(in, raw)) {
    ++line_number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    ParsedLine parsed = parse_line(line, line_number, feature_dim);
    if (groups.empty() || groups.back().query_id != parsed.query_id) {
      if (!groups.empty()) closed_ids.insert(groups.back().query_id);
      if (closed_ids.count(parsed.query_id) > 0) {
        throw ParseError("qid " + parsed.query_id + " is not contiguous",
                         line_number);
      }
      groups.push_back(QueryGroup{parsed.query_id, {}});
    }
    QueryGroup& group = groups.back();
    Document doc;
    doc.doc_index = static_cast<int>(group.documents.size());
    doc.label = parsed.label;
    if (!parsed.features.empty()) {
      max_id = std::max(max_id, parsed.features.back().first);
    }
    group.documents.push_back(std::move(doc));
    sparse.push_back(std::move(parsed.features));
  }

  std::size_t next = 0;
  for (QueryGroup& group : groups) {
    for (Document& doc : group.documents) {
      doc.features.assign(static_cast<std::size_t>(max_id), 0.0);
      for (const auto& [id, value] : sparse[next]) {
        doc.features[static_cast<std::size_t>(id - 1)] = value;
      }
      ++next;
    }
  }
  return groups;
}

std::vector<QueryGroup> parse_letor_file(const std::string& path,
                                         std::optional<int> feature_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_letor(in, feature_dim);
}

std::string serialize_letor(const std::vector<QueryGroup>& groups) {
  std::string out;
  for (const QueryGroup& group : groups) {
    for (const Document& doc : group.documents) {
      out += std::to_string(doc.label);
      out += " qid:";
      out += group.query_id;
      for (std::size_t f = 0; f < doc.features.size(); ++f) {
        if (doc.features[f] == 0.0) continue;
        out += ' ';
        out += std::to_string(f + 1);
        out += ':';
        out += format_double(doc.features[f]);
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<QueryGroup> filter_queries(std::vector<QueryGroup> groups) {
  std::erase_if(groups, [](const QueryGroup& group) {
    return group.documents.size() < 2 || group.max_label() <= 0;
  });
  return groups;
}

std::vector<QueryGroup> subsample_labeled(const std::vector<QueryGroup>& groups,
                                          double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw ArgumentError("subsample fraction must lie in (0, 1], got " +
                        format_double(fraction));
  }
  if (groups.empty()) throw ArgumentError("cannot subsample an empty dataset");
  // The epsilon keeps e.g. 0.07 * 100 = 7.000000000000001 from rounding up.
  const double target = fraction * static_cast<double>(groups.size());
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(target - 1e-9)), 1, groups.size());

  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Random rng(seed);
  rng.shuffle(order);

  std::vector<QueryGroup> subset;
  subset.reserve(count);
  for (std::size_t i = 0; i < count; ++i) subset.push_back(groups[order[i]]);
  return subset;
}

FeatureScaler::FeatureScaler(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) {
    throw ArgumentError("scaler min/max sizes differ");
  }
}

FeatureScaler FeatureScaler::fit(const std::vector<QueryGroup>& groups) {
  std::size_t dim = 0;
  for (const QueryGroup& group : groups) {
    for (const Document& doc : group.documents) {
      dim = std::max(dim, doc.features.size());
    }
  }
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const QueryGroup& group : groups) {
    for (const Document& doc : group.documents) {
      for (std::size_t f = 0; f < doc.features.size(); ++f) {
        lo[f] = std::min(lo[f], doc.features[f]);
        hi[f] = std::max(hi[f], doc.features[f]);
      }
    }
  }
  for (std::size_t f = 0; f < dim; ++f) {
    if (lo[f] > hi[f]) lo[f] = hi[f] = 0.0;
  }
  return FeatureScaler(std::move(lo), std::move(hi));
}

double FeatureScaler::scale(std::size_t feature, double value) const {
  const double range = max_[feature] - min_[feature];
  if (!(range > 0.0)) return 0.0;
  return std::clamp((value - min_[feature]) / range, 0.0, 1.0);
}

void FeatureScaler::apply(std::vector<QueryGroup>& groups) const {
  for (QueryGroup& group : groups) {
    for (Document& doc : group.documents) {
      if (doc.features.size() != dim()) {
        throw ArgumentError("document of query " + group.query_id + " has " +
                            std::to_string(doc.features.size()) +
                            " features, scaler expects " +
                            std::to_string(dim()));
      }
      for (std::size_t f = 0; f < doc.features.size(); ++f) {
        doc.features[f] = scale(f, doc.features[f]);
      }
    }
  }
}

std::string FeatureScaler::to_csv() const {
  std::string out = "feature_id,min,max\n";
  for (std::size_t f = 0; f < dim(); ++f) {
    out += std::to_string(f + 1) + "," + format_double(min_[f]) + "," +
           format_double(max_[f]) + "\n";
  }
  return out;
}

FeatureScaler FeatureScaler::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  std::vector<double> lo;
  std::vector<double> hi;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (line_number == 1) {
      if (row != "feature_id,min,max") {
        throw ParseError("expected header feature_id,min,max", line_number);
      }
      continue;
    }
    const auto fields = split(row, ',');
    const auto id = fields.size() == 3 ? parse_int(fields[0]) : std::nullopt;
    const auto mn = fields.size() == 3 ? parse_double(fields[1]) : std::nullopt;
    const auto mx = fields.size() == 3 ? parse_double(fields[2]) : std::nullopt;
    if (!id || !mn || !mx || *id != static_cast<long long>(lo.size()) + 1) {
      throw ParseError("malformed scaler row", line_number);
    }
    lo.push_back(*mn);
    hi.push_back(*mx);
  }
  return FeatureScaler(std::move(lo), std::move(hi));
}

FeatureScaler normalize_features(std::vector<QueryGroup>& groups) {
  if (groups.empty()) throw ArgumentError("cannot normalize an empty dataset");
  FeatureScaler scaler = FeatureScaler::fit(groups);
  scaler.apply(groups);
  return scaler;
}

namespace {

int dataset_dim(const std::vector<QueryGroup>& groups) {
  for (const QueryGroup& group : groups) {
    if (!group.documents.empty()) {
      return static_cast<int>(group.documents.front().features.size());
    }
  }
  return 0;
}

void resize_features(std::vector<QueryGroup>& groups, int dim) {
  for (QueryGroup& group : groups) {
    for (Document& doc : group.documents) {
      doc.features.resize(static_cast<std::size_t>(dim), 0.0);
    }
  }
}

}  // namespace

DatasetSplit load_dataset(const std::string& train_path,
                          const std::string& valid_path,
                          const std::string& test_path,
                          std::optional<int> feature_dim,
                          FeatureScaler* scaler_out) {
  DatasetSplit split;
  split.train = filter_queries(parse_letor_file(train_path, feature_dim));
  split.valid = filter_queries(parse_letor_file(valid_path, feature_dim));
  split.test = filter_queries(parse_letor_file(test_path, feature_dim));
  if (split.train.empty()) {
    throw ArgumentError("training split has no usable queries: " + train_path);
  }

  // Without a declared dimension each file infers its own; widen to the max.
  int dim = feature_dim.value_or(0);
  if (!feature_dim) {
    dim = std::max({dataset_dim(split.train), dataset_dim(split.valid),
                    dataset_dim(split.test)});
  }
  resize_features(split.train, dim);
  resize_features(split.valid, dim);
  resize_features(split.test, dim);
  split.feature_dim = dim;

  std::unordered_set<std::string> seen;
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const QueryGroup& group : *part) {
      if (!seen.insert(group.query_id).second) {
        throw ArgumentError("query id " + group.query_id +
                            " appears in more than one split");
      }
    }
  }

  FeatureScaler scaler = normalize_features(split.train);
  scaler.apply(split.valid);
  scaler.apply(split.test);
  if (scaler_out != nullptr) *scaler_out = std::move(scaler);
  return split;
}

}  // namespace cltr
