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

#ifndef CLTR_EXPERIMENT_HPP_
#define CLTR_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cltr/click_sim.hpp"
#include "cltr/cltr_train.hpp"
#include "cltr/propensity_est.hpp"

namespace cltr {

// Environment variable that, when set, is the base directory for relative
// dataset paths (instead of the config file's directory).
inline constexpr const char* kDataRootEnv = "CLTR_DATA_ROOT";

struct SimulatorSpec {
  std::string name;  // unique within a config; defaults to the model name
  SimParams params;
};

struct ExperimentConfig {
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::optional<int> feature_dim;

  std::vector<double> production_fractions = {0.01, 0.2};
  std::vector<SimulatorSpec> simulators;  // default: PBM, DCM, CBCM
  std::vector<int> sessions_per_query = {5, 20, 100};
  std::vector<LossKind> loss_kinds;  // default: all eleven
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  TrainConfig production_training;
  TrainConfig cltr_training;

  double propensity_floor = kDefaultPropensityFloor;
  EmOptions em;
  RegressionEmOptions regression;

  std::string output_dir = "runs/default";

  ExperimentConfig();

  // Parses the JSON config. Relative dataset paths resolve against
  // $CLTR_DATA_ROOT when set, else against `base_dir`. Unknown keys are
  // rejected. A relative output_dir resolves against `base_dir`.
  static ExperimentConfig from_json(const std::string& text,
                                    const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);

  // Canonical JSON with every default spelled out.
  std::string to_json() const;

  void validate() const;
};

enum class Stage {
  kTrainProduction,
  kSimulate,
  kEstimatePropensity,
  kTrainCltr,
  kEvaluate,
};

struct PipelineOptions {
  Stage until = Stage::kEvaluate;
  int jobs = 1;
  bool emit_plots = true;
  std::ostream* log = nullptr;  // progress lines; silent when null
};

struct PipelineOutcome {
  int exit_code = 0;  // 0 success, 1 some cell failed, 2 missing/invalid input
  int jobs_run = 0;
  int jobs_skipped = 0;
  std::vector<std::string> failures;
};

// Runs every stage up to `options.until` into config.output_dir:
//
//   config.json                      canonical config
//   scaler.csv                       training min/max per feature
//   seed_<s>/rankers/                skyline + production checkpoints,
//                                    metrics, eval.csv
//   seed_<s>/cells/<cell>/           clicks.csv, propensity_*.csv,
//                                    models/<KIND>.{ckpt.json,metrics.csv},
//                                    eval.csv
//   report.csv                       one row per model and cell
//   failures.csv                     only when something failed
//   plots/<seed>_<cell>.svg          nInc bar chart per cell
//
// <cell> is `pr<fraction>_<simulator>_n<sessions>`. Finished jobs are
// recognized by their `.done` records (artifact checksums) and skipped.
PipelineOutcome run_pipeline(const ExperimentConfig& config,
                             const PipelineOptions& options);

// Report CSV header.
inline constexpr const char* kReportHeader =
    "model,production_fraction,simulator,sessions_per_query,seed,"
    "ndcg@1,ndcg@3,ndcg@5,ndcg@10,arp,inc,ninc";

// One SVG bar chart of nInc per model for every cell of the report; nInc
// below -0.2 is drawn clamped and annotated. Returns the written paths.
// Throws ParseError for a malformed report.
std::vector<std::string> emit_plots(const std::string& report_csv,
                                    const std::string& out_dir);

// SVG for one cell; `models` pairs model names with nInc values.
std::string render_ninc_chart(const std::string& title,
                              const std::vector<std::pair<std::string, double>>& models);

}  // namespace cltr

#endif  // CLTR_EXPERIMENT_HPP_
