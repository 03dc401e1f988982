// Copyright 2026 The povm-ground Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "povm/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace povm {

HamiltonianSpec ExperimentConfig::hamiltonian() const {
  if (preset == "custom") {
    HamiltonianSpec h = HamiltonianSpec::custom(system_size, terms, translate);
    h.name = "custom";
    return h;
  }
  return HamiltonianSpec::preset(preset, system_size);
}

bool ExperimentConfig::use_oracle() const {
  if (oracle_compare == "off") return false;
  return system_size <= 12;
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const YAML::Node&)>;

[[noreturn]] void fail_at(const std::string& source, const YAML::Node& n, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (n.Mark().line >= 0) os << ":" << n.Mark().line + 1;
  os << ": " << what;
  throw ConfigError(os.str());
}

template <typename T>
T scalar(const std::string& source, const YAML::Node& n, const std::string& key, const char* type) {
  if (!n.IsScalar()) fail_at(source, n, key + ": expected " + type);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(source, n, key + ": expected " + type + ", got '" + n.Scalar() + "'");
  }
}

struct Schema {
  std::map<std::string, std::map<std::string, Setter>> sections;
};

Schema make_schema(const std::string& src, bool& tau_set) {
  Schema s;
  auto& model = s.sections["model"];
  model["preset"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    c.preset = scalar<std::string>(src, n, "preset", "string");
    if (c.preset != "TFIM" && c.preset != "GappedTFIM" && c.preset != "Heisenberg" && c.preset != "custom")
      fail_at(src, n, "preset: expected TFIM, GappedTFIM, Heisenberg or custom");
  };
  model["system_size"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    c.system_size = scalar<int>(src, n, "system_size", "integer");
    if (c.system_size < 1) fail_at(src, n, "system_size must be positive");
  };
  model["terms"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    if (!n.IsSequence()) fail_at(src, n, "terms: expected a list of strings");
    c.terms.clear();
    for (const auto& t : n) c.terms.push_back(scalar<std::string>(src, t, "terms", "string"));
  };
  model["translate"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.translate = scalar<bool>(src, n, "translate", "boolean"); };

  auto& pool = s.sections["pool"];
  pool["weight"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.pool_weight = scalar<int>(src, n, "weight", "integer"); };
  pool["range"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.pool_range = scalar<int>(src, n, "range", "integer"); };

  auto& tol = s.sections["tolerance"];
  tol["tau"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    c.train.tolerance.tau = scalar<double>(src, n, "tau", "number");
    tau_set = true;
  };
  tol["s"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.tolerance.s = scalar<double>(src, n, "s", "number"); };

  auto& tr = s.sections["training"];
  tr["buffer_batch"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.buffer_batch = scalar<int>(src, n, "buffer_batch", "integer"); };
  tr["grad_batch"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.grad_batch = scalar<int>(src, n, "grad_batch", "integer"); };
  tr["grad_chunk"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.grad_chunk = scalar<int>(src, n, "grad_chunk", "integer"); };
  tr["sample_chunk"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.sample_chunk = scalar<int>(src, n, "sample_chunk", "integer"); };
  tr["steps"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.steps = scalar<int>(src, n, "steps", "integer"); };
  tr["lr"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lr = scalar<double>(src, n, "lr", "number"); };
  tr["weight_decay"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.weight_decay = scalar<double>(src, n, "weight_decay", "number"); };
  tr["adam_eps"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.adam_eps = scalar<double>(src, n, "adam_eps", "number"); };
  auto pair = [&](std::array<double, 2>& dst, const YAML::Node& n, const char* key) {
    if (!n.IsSequence() || n.size() != 2) fail_at(src, n, std::string(key) + ": expected [beta1, beta2]");
    dst = {scalar<double>(src, n[0], key, "number"), scalar<double>(src, n[1], key, "number")};
  };
  tr["betas_initial"] = [&, pair](ExperimentConfig& c, const YAML::Node& n) { pair(c.train.betas_initial, n, "betas_initial"); };
  tr["betas_final"] = [&, pair](ExperimentConfig& c, const YAML::Node& n) { pair(c.train.betas_final, n, "betas_final"); };
  tr["constraints"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.constraints = scalar<bool>(src, n, "constraints", "boolean"); };
  tr["estimator"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    const auto e = scalar<std::string>(src, n, "estimator", "string");
    if (e == "straight_through")
      c.train.estimator = GradientEstimator::straight_through;
    else if (e == "relaxed")
      c.train.estimator = GradientEstimator::relaxed;
    else
      fail_at(src, n, "estimator: expected straight_through or relaxed");
  };
  tr["lambda_tgt_initial"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lambda_tgt_initial = scalar<double>(src, n, "lambda_tgt_initial", "number"); };
  tr["lambda_tgt_min"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lambda_tgt_min = scalar<double>(src, n, "lambda_tgt_min", "number"); };
  tr["lambda_tgt_max"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lambda_tgt_max = scalar<double>(src, n, "lambda_tgt_max", "number"); };
  tr["lambda_eta"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lambda_eta = scalar<double>(src, n, "lambda_eta", "number"); };
  tr["lambda_p_ref"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.lambda_p_ref = scalar<double>(src, n, "lambda_p_ref", "number"); };
  tr["checkpoint_interval"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    c.checkpoint_interval = scalar<int>(src, n, "checkpoint_interval", "integer");
    if (c.checkpoint_interval < 0) fail_at(src, n, "checkpoint_interval must be non-negative");
  };

  auto& net = s.sections["network"];
  net["hidden"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.network.hidden = scalar<int>(src, n, "hidden", "integer"); };
  net["layers"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.network.layers = scalar<int>(src, n, "layers", "integer"); };
  net["dual_stream"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.network.dual_stream = scalar<bool>(src, n, "dual_stream", "boolean"); };

  auto& temp = s.sections["temperature"];
  temp["initial"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.temperature_initial = scalar<double>(src, n, "initial", "number"); };
  temp["final"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.temperature_final = scalar<double>(src, n, "final", "number"); };
  temp["fraction"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train.temperature_fraction = scalar<double>(src, n, "fraction", "number"); };

  auto& seeds = s.sections["seeds"];
  seeds["init"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.init_seed = scalar<std::uint64_t>(src, n, "init", "unsigned integer"); };
  seeds["train"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.train_seed = scalar<std::uint64_t>(src, n, "train", "unsigned integer"); };
  seeds["eval"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.eval_seed = scalar<std::uint64_t>(src, n, "eval", "unsigned integer"); };

  s.sections["output"]["directory"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.output_dir = scalar<std::string>(src, n, "directory", "string"); };

  auto& orc = s.sections["oracle"];
  orc["compare"] = [&](ExperimentConfig& c, const YAML::Node& n) {
    c.oracle_compare = scalar<std::string>(src, n, "compare", "string");
    if (c.oracle_compare != "auto" && c.oracle_compare != "on" && c.oracle_compare != "off")
      fail_at(src, n, "compare: expected auto, on or off");
  };
  orc["calibration_samples"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.calibration_samples = scalar<int>(src, n, "calibration_samples", "integer"); };

  auto& ev = s.sections["evaluation"];
  ev["batch"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.eval_batch = scalar<int>(src, n, "batch", "integer"); };
  ev["chunks"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.eval_chunks = scalar<int>(src, n, "chunks", "integer"); };
  ev["translation_average"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.translation_average = scalar<bool>(src, n, "translation_average", "boolean"); };

  auto& th = s.sections["thresholds"];
  th["energy_density"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.energy_threshold = scalar<double>(src, n, "energy_density", "number"); };
  th["correlator"] = [&](ExperimentConfig& c, const YAML::Node& n) { c.correlator_threshold = scalar<double>(src, n, "correlator", "number"); };
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) fail_at(source, root, "top level must be a mapping of sections");
  bool tau_set = false;
  const Schema schema = make_schema(source, tau_set);
  for (const auto& sec : root) {
    const std::string name = sec.first.as<std::string>();
    const auto it = schema.sections.find(name);
    if (it == schema.sections.end()) fail_at(source, sec.first, "unknown section '" + name + "'");
    if (sec.second.IsNull()) continue;
    if (!sec.second.IsMap()) fail_at(source, sec.second, "section '" + name + "' must be a mapping");
    for (const auto& kv : sec.second) {
      const std::string key = kv.first.as<std::string>();
      const auto set = it->second.find(key);
      if (set == it->second.end()) fail_at(source, kv.first, "unknown key '" + name + "." + key + "'");
      set->second(c, kv.second);
    }
  }
  if (c.preset == "Heisenberg" && !tau_set) c.train.tolerance.tau = 4.0;
  if (c.preset == "custom" && c.terms.empty()) throw ConfigError(source + ": model.terms required for a custom model");
  if (c.preset != "custom" && !c.terms.empty()) throw ConfigError(source + ": model.terms only allowed for custom models");
  if (c.network.hidden < 1 || c.network.layers < 1) throw ConfigError(source + ": network sizes must be positive");
  if (c.eval_chunks < 2) throw ConfigError(source + ": evaluation.chunks must be at least 2");
  if (c.eval_batch < 0) throw ConfigError(source + ": evaluation.batch must be non-negative");
  if (c.calibration_samples < 2) throw ConfigError(source + ": oracle.calibration_samples must be at least 2");
  if (c.oracle_compare == "on" && c.system_size > 12) throw ConfigError(source + ": oracle comparison needs L <= 12");
  try {
    c.train.validate(c.system_size);
    c.hamiltonian().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  c.train.seed = c.train_seed;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const TrainConfig& t = c.train;
  nlohmann::json j;
  j["model"] = {{"preset", c.preset}, {"system_size", c.system_size}, {"translate", c.translate}};
  if (!c.terms.empty()) j["model"]["terms"] = c.terms;
  j["pool"] = {{"weight", t.pool_weight}, {"range", t.pool_range}};
  j["tolerance"] = {{"tau", t.tolerance.tau}, {"s", t.tolerance.s}};
  j["training"] = {{"buffer_batch", t.buffer_batch},
                   {"grad_batch", t.grad_batch},
                   {"grad_chunk", t.grad_chunk},
                   {"sample_chunk", t.sample_chunk},
                   {"steps", t.steps},
                   {"lr", t.lr},
                   {"weight_decay", t.weight_decay},
                   {"adam_eps", t.adam_eps},
                   {"betas_initial", t.betas_initial},
                   {"betas_final", t.betas_final},
                   {"constraints", t.constraints},
                   {"estimator", t.estimator == GradientEstimator::relaxed ? "relaxed" : "straight_through"},
                   {"lambda_tgt_initial", t.lambda_tgt_initial},
                   {"lambda_tgt_min", t.lambda_tgt_min},
                   {"lambda_tgt_max", t.lambda_tgt_max},
                   {"lambda_eta", t.lambda_eta},
                   {"lambda_p_ref", t.lambda_p_ref},
                   {"checkpoint_interval", c.checkpoint_interval}};
  j["network"] = {{"hidden", c.network.hidden}, {"layers", c.network.layers}, {"dual_stream", c.network.dual_stream}};
  j["temperature"] = {
      {"initial", t.temperature_initial}, {"final", t.temperature_final}, {"fraction", t.temperature_fraction}};
  j["seeds"] = {{"init", c.init_seed}, {"train", c.train_seed}, {"eval", c.eval_seed}};
  j["output"] = {{"directory", c.output_dir}};
  j["oracle"] = {{"compare", c.oracle_compare}, {"calibration_samples", c.calibration_samples}};
  j["evaluation"] = {{"batch", c.eval_batch}, {"chunks", c.eval_chunks}, {"translation_average", c.translation_average}};
  j["thresholds"] = {{"energy_density", c.energy_threshold}, {"correlator", c.correlator_threshold}};
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  // JSON is a subset of YAML, so the stored echo goes through the same validation.
  return parse_config(j.dump(), "<stored config>");
}

}  // namespace povm
