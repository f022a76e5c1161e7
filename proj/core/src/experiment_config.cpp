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

#include <cstdlib>
#include <filesystem>
#include <set>

#include "cltr/error.hpp"
#include "cltr/experiment.hpp"
#include "cltr/text.hpp"
#include "json.hpp"

namespace cltr {
namespace {

using nlohmann::json;

void reject_unknown(const json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : object.items()) {
    if (allowed.count(key) == 0) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  namespace fs = std::filesystem;
  if (path.empty() || fs::path(path).is_absolute()) return path;
  const char* root = std::getenv(kDataRootEnv);
  const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path(base_dir);
  return (base / path).lexically_normal().string();
}

TrainConfig parse_train(const json& j, TrainConfig config, const std::string& where) {
  reject_unknown(j, {"learning_rate", "batch_size", "steps", "eval_every", "hidden"}, where);
  config.learning_rate = j.value("learning_rate", config.learning_rate);
  config.batch_size = j.value("batch_size", config.batch_size);
  config.steps = j.value("steps", config.steps);
  config.eval_every = j.value("eval_every", config.eval_every);
  config.hidden = j.value("hidden", config.hidden);
  return config;
}

json train_to_json(const TrainConfig& config) {
  return json{{"learning_rate", config.learning_rate},
              {"batch_size", config.batch_size},
              {"steps", config.steps},
              {"eval_every", config.eval_every},
              {"hidden", config.hidden}};
}

SimulatorSpec parse_simulator(const json& j) {
  reject_unknown(j, {"name", "model", "epsilon", "eta", "beta", "g", "w", "viewport_size"},
                 "simulator");
  if (!j.contains("model")) throw ConfigError("simulator needs a 'model'");
  SimulatorSpec spec;
  spec.params = SimParams::defaults(click_model_from_string(j.at("model").get<std::string>()));
  spec.name = j.value("name", to_string(spec.params.model));
  SimParams& p = spec.params;
  p.epsilon = j.value("epsilon", p.epsilon);
  p.eta = j.value("eta", p.eta);
  p.beta = j.value("beta", p.beta);
  p.g = j.value("g", p.g);
  p.w = j.value("w", p.w);
  p.viewport_size = j.value("viewport_size", p.viewport_size);
  return spec;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const ClickModel model : {ClickModel::kPbm, ClickModel::kDcm, ClickModel::kCbcm}) {
    simulators.push_back(SimulatorSpec{to_string(model), SimParams::defaults(model)});
  }
  loss_kinds.assign(kAllLossKinds.begin(), kAllLossKinds.end());
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text,
                                             const std::string& base_dir) {
  ExperimentConfig config;
  try {
    const json j = json::parse(text);
    reject_unknown(j,
                   {"dataset", "production_fractions", "simulators", "sessions_per_query",
                    "loss_kinds", "seeds", "production_training", "cltr_training",
                    "propensity", "output_dir"},
                   "config");
    if (!j.contains("dataset")) throw ConfigError("config needs a 'dataset' block");
    const json& dataset = j.at("dataset");
    reject_unknown(dataset, {"train", "valid", "test", "feature_dim"}, "dataset");
    config.train_path = resolve_path(dataset.at("train").get<std::string>(), base_dir);
    config.valid_path = resolve_path(dataset.at("valid").get<std::string>(), base_dir);
    config.test_path = resolve_path(dataset.at("test").get<std::string>(), base_dir);
    if (dataset.contains("feature_dim")) config.feature_dim = dataset.at("feature_dim").get<int>();

    config.production_fractions = j.value("production_fractions", config.production_fractions);
    if (j.contains("simulators")) {
      config.simulators.clear();
      for (const json& s : j.at("simulators")) config.simulators.push_back(parse_simulator(s));
    }
    config.sessions_per_query = j.value("sessions_per_query", config.sessions_per_query);
    if (j.contains("loss_kinds")) {
      config.loss_kinds.clear();
      for (const json& k : j.at("loss_kinds")) {
        config.loss_kinds.push_back(loss_kind_from_string(k.get<std::string>()));
      }
    }
    config.seeds = j.value("seeds", config.seeds);
    if (j.contains("cltr_training")) {
      config.cltr_training = parse_train(j.at("cltr_training"), config.cltr_training,
                                         "cltr_training");
    }
    // Production training inherits the CLTR settings unless overridden.
    config.production_training = config.cltr_training;
    if (j.contains("production_training")) {
      config.production_training = parse_train(
          j.at("production_training"), config.production_training, "production_training");
    }
    if (j.contains("propensity")) {
      const json& p = j.at("propensity");
      reject_unknown(p,
                     {"floor", "em_max_iterations", "em_tolerance", "regression_hidden",
                      "regression_learning_rate", "regression_fit_steps",
                      "regression_batch_size"},
                     "propensity");
      config.propensity_floor = p.value("floor", config.propensity_floor);
      config.em.max_iterations = p.value("em_max_iterations", config.em.max_iterations);
      config.em.tolerance = p.value("em_tolerance", config.em.tolerance);
      config.regression.hidden = p.value("regression_hidden", config.regression.hidden);
      config.regression.learning_rate =
          p.value("regression_learning_rate", config.regression.learning_rate);
      config.regression.fit_steps_per_iteration =
          p.value("regression_fit_steps", config.regression.fit_steps_per_iteration);
      config.regression.fit_batch_size =
          p.value("regression_batch_size", config.regression.fit_batch_size);
    }
    namespace fs = std::filesystem;
    const fs::path out = j.value("output_dir", config.output_dir);
    config.output_dir =
        out.is_absolute() ? out.string() : (fs::path(base_dir) / out).lexically_normal().string();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  config.em.floor = config.propensity_floor;
  config.regression.em = config.em;
  config.cltr_training.propensity_floor = config.propensity_floor;
  config.production_training.propensity_floor = config.propensity_floor;
  config.validate();
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return from_json(read_file(path), base.empty() ? "." : base);
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = {{"train", train_path}, {"valid", valid_path}, {"test", test_path}};
  if (feature_dim) j["dataset"]["feature_dim"] = *feature_dim;
  j["production_fractions"] = production_fractions;
  json sims = json::array();
  for (const SimulatorSpec& s : simulators) {
    sims.push_back({{"name", s.name},
                    {"model", to_string(s.params.model)},
                    {"epsilon", s.params.epsilon},
                    {"eta", s.params.eta},
                    {"beta", s.params.beta},
                    {"g", s.params.g},
                    {"w", s.params.w},
                    {"viewport_size", s.params.viewport_size}});
  }
  j["simulators"] = std::move(sims);
  j["sessions_per_query"] = sessions_per_query;
  json kinds = json::array();
  for (const LossKind kind : loss_kinds) kinds.push_back(to_string(kind));
  j["loss_kinds"] = std::move(kinds);
  j["seeds"] = seeds;
  j["production_training"] = train_to_json(production_training);
  j["cltr_training"] = train_to_json(cltr_training);
  j["propensity"] = {{"floor", propensity_floor},
                     {"em_max_iterations", em.max_iterations},
                     {"em_tolerance", em.tolerance},
                     {"regression_hidden", regression.hidden},
                     {"regression_learning_rate", regression.learning_rate},
                     {"regression_fit_steps", regression.fit_steps_per_iteration},
                     {"regression_batch_size", regression.fit_batch_size}};
  j["output_dir"] = output_dir;
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (production_fractions.empty() || simulators.empty() || sessions_per_query.empty() ||
      loss_kinds.empty() || seeds.empty()) {
    throw ConfigError("fractions, simulators, session counts, loss kinds and seeds "
                      "must all be non-empty");
  }
  for (const double f : production_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("production fractions must lie in (0, 1]");
  }
  for (const int n : sessions_per_query) {
    if (n < 1) throw ConfigError("sessions_per_query entries must be >= 1");
  }
  std::set<std::string> names;
  for (const SimulatorSpec& s : simulators) {
    try {
      s.params.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError("simulator " + s.name + ": " + e.what());
    }
    if (s.name.empty() || s.name.find_first_of("/\\ ,") != std::string::npos) {
      throw ConfigError("simulator names must be non-empty without '/', '\\', ' ' or ','");
    }
    if (!names.insert(s.name).second) throw ConfigError("duplicate simulator name " + s.name);
  }
  std::set<LossKind> kinds(loss_kinds.begin(), loss_kinds.end());
  if (kinds.size() != loss_kinds.size()) throw ConfigError("duplicate loss kind");
  std::set<std::uint64_t> seed_set(seeds.begin(), seeds.end());
  if (seed_set.size() != seeds.size()) throw ConfigError("duplicate seed");
  production_training.validate();
  cltr_training.validate();
  if (!(propensity_floor > 0.0 && propensity_floor <= 1.0)) {
    throw ConfigError("propensity floor must lie in (0, 1]");
  }
  if (em.max_iterations < 1) throw ConfigError("em_max_iterations must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

}  // namespace cltr
