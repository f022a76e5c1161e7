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

// Small builders shared by the unit tests.

#ifndef CLTR_TESTS_TEST_UTIL_HPP_
#define CLTR_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "cltr/click_sim.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/random.hpp"

namespace testing_util {

inline cltr::QueryGroup make_group(const std::string& id, const std::vector<int>& labels,
                                   int feature_dim = 1) {
  cltr::QueryGroup group;
  group.query_id = id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    cltr::Document doc;
    doc.doc_index = static_cast<int>(i);
    doc.label = labels[i];
    doc.features.assign(static_cast<std::size_t>(feature_dim), 0.0);
    doc.features[0] = static_cast<double>(labels[i]);
    group.documents.push_back(doc);
  }
  return group;
}

inline cltr::Session make_session(std::uint32_t query, const std::vector<int>& ordering,
                                  const std::vector<int>& clicks) {
  cltr::Session session;
  session.query = query;
  session.length = static_cast<std::uint8_t>(ordering.size());
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    session.ordering[i] = ordering[i];
    session.clicks[i] = static_cast<std::uint8_t>(clicks[i]);
  }
  return session;
}

inline cltr::RankedList identity_ranking(const cltr::QueryGroup& group) {
  cltr::RankedList list;
  list.query_id = group.query_id;
  for (const auto& doc : group.documents) list.ordering.push_back(doc.doc_index);
  return list;
}

// PBM log over 10-document lists reshuffled every session, so every
// document is seen at every rank.
struct ShuffledLog {
  cltr::ClickLog log;
  std::vector<std::vector<int>> labels;
};

inline ShuffledLog shuffled_pbm_log(int queries, int sessions, std::uint64_t seed) {
  ShuffledLog out;
  cltr::Random rng(seed);
  const cltr::SimParams params = cltr::SimParams::defaults(cltr::ClickModel::kPbm);
  for (int q = 0; q < queries; ++q) {
    std::vector<int> labels(10);
    for (int& y : labels) y = static_cast<int>(rng.index(5));
    out.labels.push_back(labels);
    out.log.query_ids.push_back("q" + std::to_string(q));
    std::vector<int> order = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    for (int s = 0; s < sessions; ++s) {
      rng.shuffle(order);
      std::vector<int> shown;
      for (const int d : order) shown.push_back(labels[static_cast<std::size_t>(d)]);
      const auto clicks = cltr::simulate_session(params, shown, rng);
      cltr::Session session;
      session.query = static_cast<std::uint32_t>(q);
      session.length = 10;
      for (std::size_t i = 0; i < 10; ++i) {
        session.ordering[i] = order[i];
        session.clicks[i] = clicks[i];
      }
      out.log.sessions.push_back(session);
    }
  }
  out.log.sessions_per_query = sessions;
  out.log.sim_params = params;
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("cltr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& name = "") const { return (path_ / name).string(); }

 private:
  static int& counter() {
    static int value = 0;
    return value;
  }
  std::filesystem::path path_;
};

}  // namespace testing_util

#endif  // CLTR_TESTS_TEST_UTIL_HPP_
