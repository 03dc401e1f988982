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

#include "povm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "povm/checkpoint.hpp"
#include "povm/constraints.hpp"
#include "povm/oracle.hpp"
#include "povm/random.hpp"
#include "povm/trainer.hpp"

#ifndef POVM_VERSION
#define POVM_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace povm::cli {

std::string version_string() { return POVM_VERSION; }

namespace {

constexpr Axis kChannels[3] = {Axis::X, Axis::Y, Axis::Z};

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(is);
}

std::string channel_name(Axis a) { return std::string(2, axis_char(a)); }

fs::path checkpoint_name(long long step) { return fmt::format("step_{:06d}.ckpt", step); }

}  // namespace

Evaluation evaluate_model(const DualStreamModel& model, const HamiltonianSpec& h, int count, std::uint64_t seed,
                          std::optional<double> reference_density, bool translation_average, int chunks,
                          int sample_chunk) {
  const InferenceSamples s = sample_inference(model, h.system_size, count, seed, sample_chunk);
  const SiteValues values = SiteValues::from_outcomes(s.outcomes);
  Evaluation e;
  e.energy = EnergyEstimator(h).report(values, reference_density, chunks);
  for (Axis a : kChannels) e.correlators.push_back(estimate_correlators(values, a, translation_average, chunks));
  return e;
}

void write_energy(const fs::path& path, const EnergyReport& r, const HamiltonianSpec& h) {
  nlohmann::json j = to_json(r);
  j["model"] = h.name;
  j["system_size"] = h.system_size;
  write_json(path, j);
}

void write_correlators(const fs::path& path, const std::vector<CorrelatorTable>& tables) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "channel,j,value,stderr\n";
  for (const auto& t : tables)
    for (std::size_t j = 0; j < t.values.size(); ++j)
      os << fmt::format("{},{},{:.17g},{:.17g}\n", channel_name(t.channel), j, t.values[j],
                        j < t.stderr.size() ? t.stderr[j] : 0.0);
}

std::vector<CorrelatorTable> read_correlators(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<CorrelatorTable> out;
  std::string line;
  std::getline(is, line);
  if (line != "channel,j,value,stderr") throw std::runtime_error(path.string() + ": unexpected header");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string ch, j, v, e;
    if (!std::getline(ss, ch, ',') || !std::getline(ss, j, ',') || !std::getline(ss, v, ',') || !std::getline(ss, e))
      throw std::runtime_error(fmt::format("{}:{}: malformed row", path.string(), lineno));
    if (ch.size() != 2 || ch[0] != ch[1]) throw std::runtime_error(fmt::format("{}:{}: bad channel", path.string(), lineno));
    const Axis a = axis_from_char(ch[0]);
    auto it = std::find_if(out.begin(), out.end(), [&](const CorrelatorTable& t) { return t.channel == a; });
    if (it == out.end()) {
      out.push_back(CorrelatorTable{a, {}, {}, false});
      it = out.end() - 1;
    }
    if (std::stoul(j) != it->values.size()) throw std::runtime_error(fmt::format("{}:{}: rows out of order", path.string(), lineno));
    it->values.push_back(std::stod(v));
    it->stderr.push_back(std::stod(e));
  }
  return out;
}

fs::path cmd_train(ExperimentConfig cfg, const TrainOptions& opt, std::ostream& log) {
  if (opt.seed) {
    cfg.train_seed = *opt.seed;
    cfg.train.seed = *opt.seed;
  }
  if (opt.out) cfg.output_dir = opt.out->string();
  const HamiltonianSpec h = cfg.hamiltonian();
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir / "checkpoints");

  std::optional<oracle::ReferenceTables> ref;
  if (cfg.use_oracle()) {
    ref = oracle::reference_tables(oracle::ground_state(h));
    fmt::print(log, "reference E/L = {:.8f}\n", ref->energy_density);
  }
  const std::optional<double> ref_density = ref ? std::optional<double>(ref->energy_density) : std::nullopt;

  Trainer trainer(h, cfg.train, DualStreamModel::initialize(cfg.network, cfg.init_seed), ref_density);
  if (opt.resume) {
    const Checkpoint ckpt = load_checkpoint(*opt.resume);
    restore_checkpoint(trainer, ckpt);
    fmt::print(log, "resumed from {} at step {}\n", opt.resume->string(), trainer.state().step);
  }

  nlohmann::json manifest;
  manifest["version"] = version_string();
  manifest["command"] = "train";
  manifest["config"] = to_json(cfg);
  manifest["seeds"] = {{"init", cfg.init_seed}, {"train", cfg.train_seed}, {"eval", cfg.eval_seed}};
  manifest["hamiltonian"] = {{"name", h.name}, {"system_size", h.system_size}};
  for (const auto& t : h.terms) manifest["hamiltonian"]["terms"].push_back({{"coef", t.coef}, {"op", t.op.to_string()}});
  manifest["parameters"] = trainer.model().num_parameters();
  if (ref) manifest["reference_energy_density"] = ref->energy_density;
  if (opt.resume) manifest["resumed_from"] = opt.resume->string();
  write_json(dir / "manifest.json", manifest);

  auto save = [&](const fs::path& path) {
    Checkpoint c = make_checkpoint(trainer);
    c.metadata["config"] = to_json(cfg);
    c.metadata["version"] = version_string();
    save_checkpoint(path, c);
  };

  const std::ios::openmode mode = opt.resume ? std::ios::app : std::ios::trunc;
  std::ofstream metrics(dir / "metrics.jsonl", mode), timing(dir / "timing.jsonl", mode);
  if (!metrics || !timing) throw std::runtime_error("cannot open metric streams in " + dir.string());
  const int total = cfg.train.steps;
  const int every = opt.log_every > 0 ? opt.log_every : std::max(1, total / 50);
  double elapsed = 0.0;
  while (trainer.state().step < total) {
    const StepMetrics m = trainer.step();
    elapsed += m.seconds;
    metrics << to_json(m).dump() << "\n";
    timing << nlohmann::json{{"step", m.step}, {"seconds", m.seconds}}.dump() << "\n";
    if (m.step % every == 0 || m.step + 1 == total) {
      metrics.flush();
      fmt::print(log, "step {:5d}  E/L {:+.5f}", m.step, m.energy_density);
      if (m.delta_density) fmt::print(log, " (d {:+.5f})", *m.delta_density);
      fmt::print(log, "  P {:.3f}  lambda_tgt {:.3f}  T {:.3f}  {:.1f}s\n", m.constraints.violation, m.lambda_tgt,
                 m.temperature, elapsed);
    }
    if (cfg.checkpoint_interval > 0 && (m.step + 1) % cfg.checkpoint_interval == 0)
      save(dir / "checkpoints" / checkpoint_name(m.step + 1));
  }
  save(dir / "checkpoints" / "final.ckpt");

  const Evaluation e = evaluate_model(trainer.model(), h, cfg.evaluation_batch(), cfg.eval_seed, ref_density,
                                      cfg.translation_average, cfg.eval_chunks, cfg.train.sample_chunk);
  write_energy(dir / "energy.json", e.energy, h);
  write_correlators(dir / "correlators.csv", e.correlators);
  fmt::print(log, "final E/L {:.6f} +- {:.6f}", e.energy.energy_density, e.energy.energy_stderr / h.system_size);
  if (e.energy.delta_density) fmt::print(log, "  (vs reference {:+.6f})", *e.energy.delta_density);
  fmt::print(log, "\nrun directory {}\n", dir.string());
  return dir;
}

fs::path cmd_oracle(const ExperimentConfig& cfg, const std::optional<fs::path>& out, std::ostream& log) {
  const HamiltonianSpec h = cfg.hamiltonian();
  if (h.system_size > oracle::kMaxGroundStateSites)
    throw ConfigError(fmt::format("oracle: L = {} exceeds the exact limit of {}", h.system_size,
                                  oracle::kMaxGroundStateSites));
  const fs::path dir = out ? *out : fs::path(cfg.output_dir) / "oracle";
  fs::create_directories(dir);
  const oracle::ExactState gs = oracle::ground_state(h);
  const oracle::ReferenceTables ref = oracle::reference_tables(gs);

  nlohmann::json j;
  j["version"] = version_string();
  j["command"] = "oracle";
  j["config"] = to_json(cfg);
  j["model"] = h.name;
  j["system_size"] = h.system_size;
  j["energy"] = ref.energy;
  j["energy_density"] = ref.energy_density;
  j["gap"] = ref.gap;
  j["degenerate"] = ref.degenerate;
  write_json(dir / "reference.json", j);

  EnergyReport r;
  r.energy = ref.energy;
  r.energy_density = ref.energy_density;
  r.delta_density = 0.0;
  write_energy(dir / "energy.json", r, h);
  std::vector<CorrelatorTable> tables;
  for (int c = 0; c < 3; ++c)
    tables.push_back(CorrelatorTable{kChannels[c], ref.correlators[c], std::vector<double>(ref.correlators[c].size()), false});
  write_correlators(dir / "correlators.csv", tables);
  fmt::print(log, "{} L={}  E = {:.10f}  E/L = {:.10f}  gap = {:.6f}{}\n", h.name, h.system_size, ref.energy,
             ref.energy_density, ref.gap, ref.degenerate ? "  (degenerate)" : "");

  if (h.system_size <= oracle::kMaxDistributionSites) {
    const auto g = cached_gram_expansion(generate_templates(cfg.train.pool_weight, cfg.train.pool_range), h.system_size);
    const OutcomeBatch samples = oracle::sample_exact(gs, cfg.calibration_samples, derive_seed(cfg.eval_seed, {0x6361, 1}));
    const SpectralData spec = sample_spectrum(samples, *g, cfg.train.tolerance, derive_seed(cfg.eval_seed, {0x6361, 2}));
    std::ofstream os(dir / "calibration.csv");
    if (!os) throw std::runtime_error("cannot write calibration.csv");
    os << "k,mode,lambda_tr,lambda_val,delta,scale,ratio,near_zero\n";
    int near = 0, within1 = 0;
    double max_ratio = -INFINITY;
    for (const NoiseRatio& n : noise_ratios(spec)) {
      const bool nz = std::abs(n.ratio) <= kNearZeroRatio;
      os << fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.10g},{:.6g},{}\n", n.momentum, n.mode, n.lambda_tr,
                        n.lambda_val, n.delta, n.scale, n.ratio, int(nz));
      if (!nz) continue;
      ++near;
      if (std::abs(n.ratio) <= 1.0) ++within1;
      max_ratio = std::max(max_ratio, n.ratio);
    }
    fmt::print(log, "calibration: {} samples, {} near-zero modes, {} within |ratio| <= 1, max ratio {:.2f}\n",
               cfg.calibration_samples, near, within1, max_ratio);
  }
  return dir;
}

fs::path cmd_evaluate(const EvaluateOptions& opt, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(opt.checkpoint);
  if (!ckpt.metadata.contains("config")) throw ConfigError(opt.checkpoint.string() + ": checkpoint has no configuration");
  ExperimentConfig cfg = config_from_json(ckpt.metadata.at("config"));
  if (opt.expected) {
    const ExperimentConfig& e = *opt.expected;
    std::vector<std::string> diffs;
    if (!(e.network == ckpt.model.dims())) diffs.push_back("network");
    if (e.preset != cfg.preset) diffs.push_back("model.preset");
    if (e.system_size != cfg.system_size) diffs.push_back("model.system_size");
    if (e.terms != cfg.terms || e.translate != cfg.translate) diffs.push_back("model.terms");
    if (!diffs.empty()) {
      std::string what;
      for (const auto& d : diffs) what += (what.empty() ? "" : ", ") + d;
      throw ConfigError("checkpoint and configuration disagree on " + what);
    }
    cfg.eval_chunks = e.eval_chunks;
    cfg.translation_average = e.translation_average;
    cfg.energy_threshold = e.energy_threshold;
    cfg.correlator_threshold = e.correlator_threshold;
  }
  if (!(cfg.network == ckpt.model.dims())) throw ConfigError("checkpoint network does not match its stored configuration");
  const HamiltonianSpec h = cfg.hamiltonian();
  const int count = opt.batch ? *opt.batch : cfg.evaluation_batch();
  if (count < 1) throw ConfigError("evaluation batch must be positive");
  const std::uint64_t seed = opt.seed ? *opt.seed : cfg.eval_seed;
  std::optional<double> ref;
  if (cfg.use_oracle()) ref = oracle::ground_state(h).energy / h.system_size;

  const fs::path dir = opt.out ? *opt.out : opt.checkpoint.parent_path() / ("eval_" + opt.checkpoint.stem().string());
  fs::create_directories(dir);
  const Evaluation e =
      evaluate_model(ckpt.model, h, count, seed, ref, cfg.translation_average, cfg.eval_chunks, cfg.train.sample_chunk);
  nlohmann::json manifest;
  manifest["version"] = version_string();
  manifest["command"] = "evaluate";
  manifest["checkpoint"] = opt.checkpoint.string();
  manifest["step"] = ckpt.metadata.value("step", 0LL);
  manifest["batch"] = count;
  manifest["seed"] = seed;
  manifest["config"] = to_json(cfg);
  write_json(dir / "manifest.json", manifest);
  write_energy(dir / "energy.json", e.energy, h);
  write_correlators(dir / "correlators.csv", e.correlators);
  fmt::print(log, "E/L {:.6f} +- {:.6f} on {} samples", e.energy.energy_density,
             e.energy.energy_stderr / h.system_size, count);
  if (e.energy.delta_density) fmt::print(log, "  (vs reference {:+.6f})", *e.energy.delta_density);
  fmt::print(log, "\nvariance per site {:.5f} +- {:.5f}{}\n", e.energy.variance_per_site, e.energy.variance_stderr,
             e.energy.variance_caveat ? "  (error exceeds magnitude)" : "");
  return dir;
}

nlohmann::json to_json(const Comparison& c) {
  return {{"system_size", c.system_size},
          {"model", c.model},
          {"delta_density", c.delta_density},
          {"max_correlator_deviation", c.max_correlator_deviation},
          {"worst_channel", c.worst_channel},
          {"worst_distance", c.worst_distance},
          {"energy_threshold", c.energy_threshold},
          {"correlator_threshold", c.correlator_threshold},
          {"passed", c.passed}};
}

Comparison compare_dirs(const fs::path& run, const fs::path& oracle_dir, std::optional<double> energy_threshold,
                        std::optional<double> correlator_threshold) {
  const nlohmann::json ea = read_json(run / "energy.json"), eb = read_json(oracle_dir / "energy.json");
  Comparison c;
  c.system_size = ea.at("system_size").get<int>();
  c.model = ea.at("model").get<std::string>();
  if (eb.at("system_size").get<int>() != c.system_size || eb.at("model").get<std::string>() != c.model)
    throw IncompatibleRuns(fmt::format("cannot compare {} L={} with {} L={}", c.model, c.system_size,
                                       eb.at("model").get<std::string>(), eb.at("system_size").get<int>()));
  c.delta_density = ea.at("energy_density").get<double>() - eb.at("energy_density").get<double>();

  const auto ta = read_correlators(run / "correlators.csv"), tb = read_correlators(oracle_dir / "correlators.csv");
  c.max_correlator_deviation = 0.0;
  for (const auto& a : ta) {
    const auto b = std::find_if(tb.begin(), tb.end(), [&](const CorrelatorTable& t) { return t.channel == a.channel; });
    if (b == tb.end() || b->values.size() != a.values.size())
      throw IncompatibleRuns("correlator tables differ in channels or length");
    for (std::size_t j = 0; j < a.values.size(); ++j) {
      const double d = std::abs(a.values[j] - b->values[j]);
      if (d > c.max_correlator_deviation || c.worst_channel.empty()) {
        c.max_correlator_deviation = std::max(d, c.max_correlator_deviation);
        c.worst_channel = channel_name(a.channel);
        c.worst_distance = int(j);
      }
    }
  }

  ExperimentConfig defaults;
  double et = defaults.energy_threshold, ct = defaults.correlator_threshold;
  if (fs::exists(run / "manifest.json")) {
    const nlohmann::json m = read_json(run / "manifest.json");
    if (m.contains("config")) {
      const auto& th = m["config"]["thresholds"];
      et = th.value("energy_density", et);
      ct = th.value("correlator", ct);
    }
  }
  c.energy_threshold = energy_threshold.value_or(et);
  c.correlator_threshold = correlator_threshold.value_or(ct);
  c.passed = std::abs(c.delta_density) <= c.energy_threshold && c.max_correlator_deviation <= c.correlator_threshold;
  return c;
}

Comparison cmd_compare(const fs::path& run, const fs::path& oracle_dir, std::ostream& log) {
  const Comparison c = compare_dirs(run, oracle_dir);
  write_json(run / "compare.json", to_json(c));
  fmt::print(log, "{} L={}\n", c.model, c.system_size);
  fmt::print(log, "  |dE/L|            {:.6f}  (threshold {:g})  {}\n", std::abs(c.delta_density), c.energy_threshold,
             std::abs(c.delta_density) <= c.energy_threshold ? "ok" : "FAIL");
  fmt::print(log, "  max correlator    {:.6f}  at {} j={}  (threshold {:g})  {}\n", c.max_correlator_deviation,
             c.worst_channel, c.worst_distance, c.correlator_threshold,
             c.max_correlator_deviation <= c.correlator_threshold ? "ok" : "FAIL");
  if (!c.passed) throw ThresholdFailure("comparison thresholds exceeded");
  return c;
}

}  // namespace povm::cli
