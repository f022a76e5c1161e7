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

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <tuple>
#include <sstream>
#include <thread>

#include "cltr/error.hpp"
#include "cltr/eval_metrics.hpp"
#include "cltr/experiment.hpp"
#include "cltr/random.hpp"
#include "cltr/text.hpp"

namespace cltr {
namespace {

namespace fs = std::filesystem;

constexpr const char* kEvalHeader = "model,ndcg@1,ndcg@3,ndcg@5,ndcg@10,arp,n_queries";
constexpr const char* kSkylineName = "Skyline";
constexpr const char* kProductionName = "PR";

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path.string()))); }

std::string fingerprint(std::initializer_list<std::string_view> parts) {
  std::uint64_t hash = fnv1a64("cltr-fingerprint-v1");
  for (const std::string_view part : parts) {
    hash = fnv1a64(part, hash);
    hash = fnv1a64("\x1f", hash);
  }
  return hex64(hash);
}

// A `.done` record: the job fingerprint followed by one `<file> <hash>` line
// per artifact (paths relative to the record's directory).
bool job_complete(const fs::path& record, const std::string& print) {
  std::error_code ec;
  if (!fs::exists(record, ec)) return false;
  std::istringstream in(read_file(record.string()));
  std::string line;
  if (!std::getline(in, line) || line != "fingerprint " + print) return false;
  while (std::getline(in, line)) {
    const auto space = line.rfind(' ');
    if (space == std::string::npos) return false;
    const fs::path artifact = record.parent_path() / line.substr(0, space);
    if (!fs::exists(artifact, ec) || file_hash(artifact) != line.substr(space + 1)) {
      return false;
    }
  }
  return true;
}

void mark_complete(const fs::path& record, const std::string& print,
                   const std::vector<std::string>& artifacts) {
  std::string text = "fingerprint " + print + "\n";
  for (const std::string& name : artifacts) {
    text += name + " " + file_hash(record.parent_path() / name) + "\n";
  }
  write_file_if_changed(record.string(), text);
}

void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::string eval_row(const EvalReport& report) {
  std::string row = report.model_name;
  for (const int k : kReportCutoffs) row += "," + format_double(report.ndcg_at_k.at(k));
  row += "," + format_double(report.arp) + "," + std::to_string(report.n_queries) + "\n";
  return row;
}

std::vector<EvalReport> parse_eval(const std::string& text) {
  std::vector<EvalReport> reports;
  std::istringstream in(text);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line_number == 1) {
      if (line != kEvalHeader) throw ParseError("unexpected eval header", line_number);
      continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7) throw ParseError("eval row needs 7 fields", line_number);
    EvalReport report;
    report.model_name = std::string(fields[0]);
    for (std::size_t i = 0; i < kReportCutoffs.size(); ++i) {
      const auto value = parse_double(fields[i + 1]);
      if (!value) throw ParseError("bad nDCG value", line_number);
      report.ndcg_at_k[kReportCutoffs[i]] = *value;
    }
    const auto arp_value = parse_double(fields[5]);
    const auto n = parse_int(fields[6]);
    if (!arp_value || !n) throw ParseError("bad eval row", line_number);
    report.arp = *arp_value;
    report.n_queries = static_cast<int>(*n);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string propensity_file(PropensitySource source) {
  switch (source) {
    case PropensitySource::kPbmEm:
      return "propensity_pbm_em.csv";
    case PropensitySource::kPbmRegression:
      return "propensity_pbm_reg.csv";
    case PropensitySource::kDcmMle:
      return "propensity_dcm_mle.csv";
    default:
      return "";
  }
}

std::string sim_key(const SimulatorSpec& spec) {
  const SimParams& p = spec.params;
  return to_string(p.model) + "/" + format_double(p.epsilon) + "/" + format_double(p.eta) +
         "/" + format_double(p.beta) + "/" + format_double(p.g) + "/" + format_double(p.w) +
         "/" + std::to_string(p.viewport_size);
}

std::string train_key(const TrainConfig& c) {
  std::string key = format_double(c.learning_rate) + "/" + std::to_string(c.batch_size) + "/" +
                    std::to_string(c.steps) + "/" + std::to_string(c.eval_every) + "/" +
                    format_double(c.propensity_floor) + "/";
  for (const int h : c.hidden) key += std::to_string(h) + ".";
  return key;
}

struct RankerJob {
  std::uint64_t seed;
  std::string name;  // "Skyline" or "PR"-prefixed fraction label
  double fraction;   // 1 for the skyline
};

struct CellJob {
  std::uint64_t seed;
  double fraction;
  const SimulatorSpec* simulator;
  int sessions;
};

class Pipeline {
 public:
  Pipeline(const ExperimentConfig& config, const PipelineOptions& options)
      : config_(config), options_(options), out_(config.output_dir) {}

  PipelineOutcome run();

 private:
  static std::string ranker_file(double fraction) { return "pr" + format_double(fraction); }
  fs::path seed_dir(std::uint64_t seed) const { return out_ / ("seed_" + std::to_string(seed)); }
  fs::path rankers_dir(std::uint64_t seed) const { return seed_dir(seed) / "rankers"; }
  static std::string cell_name(const CellJob& cell) {
    return "pr" + format_double(cell.fraction) + "_" + cell.simulator->name + "_n" +
           std::to_string(cell.sessions);
  }
  fs::path cell_dir(const CellJob& cell) const {
    return seed_dir(cell.seed) / "cells" / cell_name(cell);
  }
  std::string ranker_fingerprint(std::uint64_t seed, const std::string& stem, double fraction) const {
    return fingerprint({data_key_, train_key(config_.production_training),
                        std::to_string(seed), stem, format_double(fraction)});
  }

  void say(const std::string& line) {
    if (options_.log == nullptr) return;
    std::lock_guard<std::mutex> lock(mutex_);
    *options_.log << line << '\n';
  }
  void fail(const std::string& seed_cell, const std::string& model, const std::string& stage,
            const std::string& message) {
    std::lock_guard<std::mutex> lock(mutex_);
    failures_.push_back({seed_cell, model, stage, message});
    if (options_.log != nullptr) {
      *options_.log << "FAILED " << seed_cell << " " << model << " [" << stage << "]: " << message
                    << '\n';
    }
  }

  void run_ranker(const RankerJob& job);
  void run_cell(const CellJob& cell);
  std::string build_report();

  struct Failure {
    std::string where, model, stage, message;
  };

  const ExperimentConfig& config_;
  const PipelineOptions& options_;
  fs::path out_;
  DatasetSplit data_;
  std::string data_key_;
  std::mutex mutex_;
  std::vector<Failure> failures_;
  std::atomic<int> run_{0};
  std::atomic<int> skipped_{0};
};

void Pipeline::run_ranker(const RankerJob& job) {
  const fs::path dir = rankers_dir(job.seed);
  const std::string stem = job.name;
  const fs::path record = dir / (stem + ".done");
  const std::string print = ranker_fingerprint(job.seed, stem, job.fraction);
  const std::string where = "seed_" + std::to_string(job.seed) + "/rankers";
  if (job_complete(record, print)) {
    ++skipped_;
    return;
  }
  try {
    TrainConfig train = config_.production_training;
    train.seed = derive_seed(job.seed, "ranker/" + stem);
    const std::vector<QueryGroup> labeled =
        stem == kSkylineName
            ? data_.train
            : subsample_labeled(data_.train, job.fraction, derive_seed(job.seed, "subsample/" + stem));
    say("training " + where + "/" + stem + " on " + std::to_string(labeled.size()) + " queries");
    const TrainResult result = train_production_ranker(train, labeled, data_.valid);
    EvalReport report = evaluate_ranker(result.params, data_.test, stem);

    save_checkpoint(result.params, (dir / (stem + ".ckpt.json")).string());
    write_file_if_changed((dir / (stem + ".metrics.csv")).string(), result.metrics_csv());
    write_file_if_changed((dir / (stem + ".eval.csv")).string(),
                          std::string(kEvalHeader) + "\n" + eval_row(report));
    mark_complete(record, print, {stem + ".ckpt.json", stem + ".metrics.csv", stem + ".eval.csv"});
    ++run_;
  } catch (const std::exception& e) {
    fail(where, stem, "train-production", e.what());
  }
}

void Pipeline::run_cell(const CellJob& cell) {
  const fs::path dir = cell_dir(cell);
  const std::string name = cell_name(cell);
  const std::string where = "seed_" + std::to_string(cell.seed) + "/" + name;
  const std::string pr_stem = ranker_file(cell.fraction);
  const fs::path pr_record = rankers_dir(cell.seed) / (pr_stem + ".done");
  const std::string pr_print = ranker_fingerprint(cell.seed, pr_stem, cell.fraction);
  if (!job_complete(pr_record, pr_print)) {
    fail(where, "*", "simulate", "production ranker " + pr_stem + " is missing");
    return;
  }

  // Simulate.
  const std::string sim_print = fingerprint({pr_print, sim_key(*cell.simulator),
                                             std::to_string(cell.sessions), name});
  bool did_work = false;
  if (!job_complete(dir / "clicks.done", sim_print)) {
    try {
      const MlpParams ranker =
          load_checkpoint((rankers_dir(cell.seed) / (pr_stem + ".ckpt.json")).string());
      const ClickLog log = generate_log(data_.train, ranker, cell.sessions,
                                        cell.simulator->params,
                                        derive_seed(cell.seed, "log/" + name));
      say("simulated " + where + ": " + std::to_string(log.sessions.size()) + " sessions");
      write_file_if_changed((dir / "clicks.csv").string(), click_log_to_text(log));
      mark_complete(dir / "clicks.done", sim_print, {"clicks.csv"});
      did_work = true;
    } catch (const std::exception& e) {
      fail(where, "*", "simulate", e.what());
      return;
    }
  }
  if (options_.until == Stage::kSimulate) {
    did_work ? ++run_ : ++skipped_;
    return;
  }

  std::optional<ClickLog> log;
  const auto click_log = [&]() -> const ClickLog& {
    if (!log) log = click_log_from_text(read_file((dir / "clicks.csv").string()));
    return *log;
  };
  const std::string log_checksum = file_hash(dir / "clicks.csv");

  // Estimate propensities required by the requested kinds.
  std::set<PropensitySource> sources;
  for (const LossKind kind : config_.loss_kinds) {
    const PropensitySource source = propensity_source(kind);
    if (!propensity_file(source).empty()) sources.insert(source);
  }
  std::map<PropensitySource, std::string> source_prints;
  for (const PropensitySource source : sources) {
    const std::string file = propensity_file(source);
    const std::string stem = file.substr(0, file.size() - 4);
    std::string print = fingerprint({sim_print, stem, format_double(config_.propensity_floor)});
    if (source == PropensitySource::kPbmEm) {
      print = fingerprint({print, std::to_string(config_.em.max_iterations),
                           format_double(config_.em.tolerance)});
    } else if (source == PropensitySource::kPbmRegression) {
      std::string hidden;
      for (const int h : config_.regression.hidden) hidden += std::to_string(h) + ".";
      print = fingerprint({print, std::to_string(config_.regression.em.max_iterations),
                           format_double(config_.regression.em.tolerance), hidden,
                           format_double(config_.regression.learning_rate),
                           std::to_string(config_.regression.fit_steps_per_iteration),
                           std::to_string(config_.regression.fit_batch_size)});
    }
    const fs::path record = dir / (stem + ".done");
    if (!job_complete(record, print)) {
      try {
        PropensityTable table;
        if (source == PropensitySource::kPbmEm) {
          table = em_pbm(click_log(), config_.em);
        } else if (source == PropensitySource::kPbmRegression) {
          RegressionEmOptions options = config_.regression;
          options.seed = derive_seed(cell.seed, "regression-em/" + name);
          table = regression_em_pbm(click_log(), data_.train, options).table;
        } else {
          table = mle_dcm(click_log(), config_.propensity_floor);
        }
        table.source_checksum = log_checksum;
        write_file_if_changed((dir / file).string(), table.to_csv());
        mark_complete(record, print, {file});
        did_work = true;
      } catch (const std::exception& e) {
        fail(where, stem, "estimate-propensity", e.what());
        continue;
      }
    }
    source_prints[source] = print;
  }
  if (options_.until == Stage::kEstimatePropensity) {
    did_work ? ++run_ : ++skipped_;
    return;
  }

  // Train.
  std::vector<std::pair<LossKind, std::string>> trained;
  for (const LossKind kind : config_.loss_kinds) {
    const std::string kind_name = to_string(kind);
    const PropensitySource source = propensity_source(kind);
    const bool needs_table = !propensity_file(source).empty();
    if (needs_table && source_prints.count(source) == 0) {
      fail(where, kind_name, "train-cltr", "propensity table unavailable");
      continue;
    }
    const std::string print = fingerprint({needs_table ? source_prints[source] : sim_print,
                                           train_key(config_.cltr_training), kind_name});
    const fs::path record = dir / "models" / (kind_name + ".done");
    if (!job_complete(record, print)) {
      try {
        std::optional<PropensityTable> table;
        if (needs_table) {
          table = PropensityTable::from_csv(read_file((dir / propensity_file(source)).string()));
        }
        TrainConfig train = config_.cltr_training;
        train.seed = derive_seed(cell.seed, "cltr/" + name + "/" + kind_name);
        say("training " + where + "/" + kind_name);
        const TrainResult result = train_cltr(train, kind, click_log(), data_.train, data_.valid,
                                              table ? &*table : nullptr);
        const fs::path models = dir / "models";
        save_checkpoint(result.params, (models / (kind_name + ".ckpt.json")).string());
        write_file_if_changed((models / (kind_name + ".metrics.csv")).string(),
                              result.metrics_csv());
        std::vector<std::string> artifacts = {kind_name + ".ckpt.json",
                                              kind_name + ".metrics.csv"};
        if (result.learned_propensity) {
          PropensityTable learned;
          learned.kind = kind == LossKind::kDlaDcm ? PropensityKind::kDcmLambda
                                                   : PropensityKind::kPbmRho;
          learned.values = *result.learned_propensity;
          learned.floor = config_.propensity_floor;
          learned.source_checksum = log_checksum;
          write_file_if_changed((models / (kind_name + ".propensity.csv")).string(),
                                learned.to_csv());
          artifacts.push_back(kind_name + ".propensity.csv");
        }
        mark_complete(record, print, artifacts);
        did_work = true;
      } catch (const std::exception& e) {
        fail(where, kind_name, "train-cltr", e.what());
        continue;
      }
    }
    trained.emplace_back(kind, print);
  }
  if (options_.until == Stage::kTrainCltr) {
    did_work ? ++run_ : ++skipped_;
    return;
  }

  // Evaluate.
  std::uint64_t eval_hash = fnv1a64("eval");
  for (const auto& entry : trained) eval_hash = fnv1a64(entry.second, eval_hash);
  const std::string eval_print = hex64(eval_hash);
  if (!job_complete(dir / "eval.done", eval_print)) {
    try {
      std::string text = std::string(kEvalHeader) + "\n";
      for (const auto& [kind, print] : trained) {
        const std::string kind_name = to_string(kind);
        const MlpParams params =
            load_checkpoint((dir / "models" / (kind_name + ".ckpt.json")).string());
        text += eval_row(evaluate_ranker(params, data_.test, kind_name));
      }
      write_file_if_changed((dir / "eval.csv").string(), text);
      mark_complete(dir / "eval.done", eval_print, {"eval.csv"});
      did_work = true;
    } catch (const std::exception& e) {
      fail(where, "*", "evaluate", e.what());
      return;
    }
  }
  did_work ? ++run_ : ++skipped_;
}

std::string Pipeline::build_report() {
  std::string report = std::string(kReportHeader) + "\n";
  const auto number = [](double v) { return format_double(v); };
  for (const std::uint64_t seed : config_.seeds) {
    const auto read_single = [&](const std::string& stem) -> std::optional<EvalReport> {
      const fs::path path = rankers_dir(seed) / (stem + ".eval.csv");
      std::error_code ec;
      if (!fs::exists(path, ec)) return std::nullopt;
      auto rows = parse_eval(read_file(path.string()));
      if (rows.size() != 1) return std::nullopt;
      return rows.front();
    };
    const std::optional<EvalReport> skyline = read_single(kSkylineName);
    for (const double fraction : config_.production_fractions) {
      const std::optional<EvalReport> pr = read_single(ranker_file(fraction));
      for (const SimulatorSpec& sim : config_.simulators) {
        for (const int sessions : config_.sessions_per_query) {
          const CellJob cell{seed, fraction, &sim, sessions};
          const std::string where = "seed_" + std::to_string(seed) + "/" + cell_name(cell);
          const fs::path eval_path = cell_dir(cell) / "eval.csv";
          std::error_code ec;
          if (!skyline || !pr) continue;  // the ranker failure is already recorded
          std::vector<EvalReport> rows = {*pr, *skyline};
          rows[0].model_name = kProductionName;
          rows[1].model_name = kSkylineName;
          if (fs::exists(eval_path, ec)) {
            for (EvalReport& r : parse_eval(read_file(eval_path.string()))) {
              rows.push_back(std::move(r));
            }
          }
          for (const EvalReport& row : rows) {
            std::string inc;
            std::string ninc;
            try {
              const IncResult ir = inc_ninc(row.ndcg5(), pr->ndcg5(), skyline->ndcg5());
              inc = number(ir.inc);
              ninc = number(ir.ninc);
            } catch (const MetricUndefinedError& e) {
              if (row.model_name == kProductionName) fail(where, "*", "evaluate", e.what());
            }
            report += row.model_name + "," + number(fraction) + "," + sim.name + "," +
                      std::to_string(sessions) + "," + std::to_string(seed);
            for (const int k : kReportCutoffs) report += "," + number(row.ndcg_at_k.at(k));
            report += "," + number(row.arp) + "," + inc + "," + ninc + "\n";
          }
        }
      }
    }
  }
  return report;
}

PipelineOutcome Pipeline::run() {
  PipelineOutcome outcome;
  for (const std::string* path : {&config_.train_path, &config_.valid_path, &config_.test_path}) {
    std::error_code ec;
    if (!fs::exists(*path, ec)) {
      outcome.exit_code = 2;
      outcome.failures.push_back("dataset file not found: " + *path);
      return outcome;
    }
  }
  FeatureScaler scaler;
  try {
    data_ = load_dataset(config_.train_path, config_.valid_path, config_.test_path,
                         config_.feature_dim, &scaler);
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.failures.push_back(std::string("cannot load dataset: ") + e.what());
    return outcome;
  }
  data_key_ = fingerprint({file_hash(config_.train_path), file_hash(config_.valid_path),
                           file_hash(config_.test_path),
                           std::to_string(config_.feature_dim.value_or(0))});
  fs::create_directories(out_);
  write_file_if_changed((out_ / "config.json").string(), config_.to_json());
  write_file_if_changed((out_ / "scaler.csv").string(), scaler.to_csv());

  std::vector<RankerJob> rankers;
  for (const std::uint64_t seed : config_.seeds) {
    rankers.push_back({seed, kSkylineName, 1.0});
    for (const double fraction : config_.production_fractions) {
      rankers.push_back({seed, ranker_file(fraction), fraction});
    }
  }
  parallel_for(options_.jobs, rankers.size(), [&](std::size_t i) { run_ranker(rankers[i]); });

  if (options_.until != Stage::kTrainProduction) {
    std::vector<CellJob> cells;
    for (const std::uint64_t seed : config_.seeds) {
      for (const double fraction : config_.production_fractions) {
        for (const SimulatorSpec& sim : config_.simulators) {
          for (const int sessions : config_.sessions_per_query) {
            cells.push_back({seed, fraction, &sim, sessions});
          }
        }
      }
    }
    parallel_for(options_.jobs, cells.size(), [&](std::size_t i) { run_cell(cells[i]); });
  }

  if (options_.until == Stage::kEvaluate) {
    const std::string report = build_report();
    write_file_if_changed((out_ / "report.csv").string(), report);
    if (options_.emit_plots) {
      try {
        emit_plots(report, (out_ / "plots").string());
      } catch (const std::exception& e) {
        fail("plots", "*", "plot", e.what());
      }
    }
  }

  const fs::path failures_path = out_ / "failures.csv";
  if (!failures_.empty()) {
    // Sorted so the file does not depend on worker scheduling.
    std::sort(failures_.begin(), failures_.end(), [](const Failure& a, const Failure& b) {
      return std::tie(a.where, a.model, a.stage) < std::tie(b.where, b.model, b.stage);
    });
    std::string text = "where,model,stage,message\n";
    for (const Failure& f : failures_) {
      std::string message = f.message;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      text += f.where + "," + f.model + "," + f.stage + "," + message + "\n";
      outcome.failures.push_back(f.where + " " + f.model + " [" + f.stage + "]: " + f.message);
    }
    write_file_if_changed(failures_path.string(), text);
    outcome.exit_code = 1;
  } else {
    std::error_code ec;
    fs::remove(failures_path, ec);
  }
  outcome.jobs_run = run_;
  outcome.jobs_skipped = skipped_;
  return outcome;
}

}  // namespace

PipelineOutcome run_pipeline(const ExperimentConfig& config, const PipelineOptions& options) {
  config.validate();
  Pipeline pipeline(config, options);
  return pipeline.run();
}

}  // namespace cltr
