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

// Command-line front end for the experiment pipeline.
//
//   cltr run-all --config configs/toy.json --jobs 4
//   cltr simulate --config configs/toy.json --seed-override 3
//   cltr plot --report runs/toy/report.csv --out runs/toy/plots
//   cltr make-toy --out data/toy

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "cltr/error.hpp"
#include "cltr/experiment.hpp"
#include "cltr/letor_data.hpp"
#include "cltr/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailures = 1;
constexpr int kExitBadInput = 2;

struct PipelineFlags {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--config", flags.config, "experiment config (JSON)")->required();
  cmd->add_option("--out", flags.out, "output directory (overrides the config)");
  cmd->add_option("--jobs", flags.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed-override", flags.seed_override, "run only this seed");
}

int run_stage(const PipelineFlags& flags, cltr::Stage until, bool plots) {
  cltr::ExperimentConfig config;
  try {
    config = cltr::ExperimentConfig::load(flags.config);
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (flags.seed_override) config.seeds = {*flags.seed_override};
    config.validate();
  } catch (const cltr::Error& e) {
    std::cerr << "cltr: " << e.what() << "\n";
    return kExitBadInput;
  }

  cltr::PipelineOptions options;
  options.until = until;
  options.jobs = flags.jobs;
  options.emit_plots = plots;
  options.log = &std::cerr;
  const cltr::PipelineOutcome outcome = cltr::run_pipeline(config, options);
  for (const std::string& failure : outcome.failures) std::cerr << "cltr: " << failure << "\n";
  std::cerr << "cltr: " << outcome.jobs_run << " jobs run, " << outcome.jobs_skipped
            << " up to date\n";
  return outcome.exit_code;
}

int run_plot(const std::string& report, std::string out) {
  try {
    if (out.empty()) out = (std::filesystem::path(report).parent_path() / "plots").string();
    for (const std::string& path : cltr::emit_plots(cltr::read_file(report), out)) {
      std::cout << path << "\n";
    }
    return kExitOk;
  } catch (const cltr::Error& e) {
    std::cerr << "cltr: " << e.what() << "\n";
    return kExitBadInput;
  }
}

int run_make_toy(const std::string& out, std::uint64_t seed, int train, int held_out) {
  cltr::ToyDatasetOptions options;
  options.seed = seed;
  const std::filesystem::path dir(out);
  const std::pair<const char*, int> splits[] = {
      {"train", train}, {"valid", held_out}, {"test", held_out}};
  for (const auto& [name, count] : splits) {
    options.num_queries = count;
    const std::string path = (dir / (std::string(name) + ".txt")).string();
    cltr::write_file_if_changed(path, cltr::serialize_letor(cltr::make_toy_groups(options, name)));
    std::cout << path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual learning-to-rank robustness experiments"};
  app.require_subcommand(1);

  struct Stage {
    const char* name;
    const char* help;
    cltr::Stage until;
    bool plots;
  };
  const Stage stages[] = {
      {"train-production", "train the skyline and production rankers",
       cltr::Stage::kTrainProduction, false},
      {"simulate", "generate click logs for every cell", cltr::Stage::kSimulate, false},
      {"estimate-propensity", "fit propensity tables from the click logs",
       cltr::Stage::kEstimatePropensity, false},
      {"train-cltr", "train every requested loss kind", cltr::Stage::kTrainCltr, false},
      {"evaluate", "evaluate on the test split and write the report",
       cltr::Stage::kEvaluate, false},
      {"run-all", "every stage plus plots", cltr::Stage::kEvaluate, true},
  };
  PipelineFlags flags;
  int exit_code = kExitOk;
  for (const Stage& stage : stages) {
    CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
    add_pipeline_flags(cmd, flags);
    cmd->callback([&, stage] { exit_code = run_stage(flags, stage.until, stage.plots); });
  }

  std::string report;
  std::string plot_out;
  CLI::App* plot = app.add_subcommand("plot", "render nInc bar charts from a report");
  plot->add_option("--report", report, "report CSV")->required();
  plot->add_option("--out", plot_out, "output directory (default: <report dir>/plots)");
  plot->callback([&] { exit_code = run_plot(report, plot_out); });

  std::string toy_out;
  std::uint64_t toy_seed = cltr::ToyDatasetOptions{}.seed;
  int toy_train = 200;
  int toy_held_out = 100;
  CLI::App* toy = app.add_subcommand("make-toy", "write the synthetic toy dataset");
  toy->add_option("--out", toy_out, "output directory")->required();
  toy->add_option("--seed", toy_seed, "generator seed");
  toy->add_option("--train-queries", toy_train)->check(CLI::PositiveNumber);
  toy->add_option("--held-out-queries", toy_held_out)->check(CLI::PositiveNumber);
  toy->callback([&] { exit_code = run_make_toy(toy_out, toy_seed, toy_train, toy_held_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "cltr: " << e.what() << "\n";
    return kExitBadInput;
  }
  return exit_code;
}
