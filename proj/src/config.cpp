// Copyright 2026 The fedsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "fedsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace fedsim {

namespace {

struct KeyDefault {
  const char* key;
  const char* value;  // nullptr: required
};

// Duration keys (local.steps / local.epochs) are handled separately since
// exactly one of them may be set.
constexpr KeyDefault kKeys[] = {
    {"seed", "0"},
    {"rounds", nullptr},
    {"stateful", "false"},
    {"eval.every", "10"},
    {"problem.kind", nullptr},
    {"problem.clients", "4"},
    {"problem.dim", "10"},
    {"problem.eig_min", "0.5"},
    {"problem.eig_max", "2"},
    {"problem.shared_curvature", "true"},
    {"problem.heterogeneity", "1"},
    {"problem.noise_sigma", "0"},
    {"problem.alpha", "0"},
    {"problem.beta", "0"},
    {"problem.samples_per_client", "50"},
    {"problem.classes", "10"},
    {"problem.partition_file", ""},
    {"problem.shuffle", "0"},
    {"local.optimizer", "sgd"},
    {"local.lr", nullptr},
    {"local.momentum", "0.9"},
    {"local.beta1", "0.9"},
    {"local.beta2", "0.999"},
    {"local.eps", "1e-08"},
    {"local.batch_size", "1"},
    {"local.regularizer", "none"},
    {"local.mu", "0"},
    {"local.scaffold", "false"},
    {"server.optimizer", "sgd"},
    {"server.lr", "1"},
    {"server.momentum", "0.9"},
    {"server.beta1", "0.9"},
    {"server.beta2", "0.99"},
    {"server.eps", "0.001"},
    {"server.lr_decay", "1"},
    {"server.lr_decay_period", "0"},
    {"aggregation.weighting", "auto"},
    {"aggregation.normalization", "none"},
    {"aggregation.unbiased", "false"},
    {"aggregation.dp_clip", "0"},
    {"aggregation.dp_noise", "0"},
    {"aggregation.compression", "none"},
    {"aggregation.levels", "2"},
    {"aggregation.topk", "1"},
    {"aggregation.error_feedback", "false"},
    {"sampling.scheme", "full"},
    {"sampling.cohort", "1"},
    {"sampling.period", "2"},
    {"split.mode", "none"},
    {"split.train", "0.8"},
    {"split.val", "0.1"},
    {"split.test", "0.1"},
    {"cost.b_down", "0.75"},
    {"cost.b_up", "0.25"},
    {"cost.r_comp", "7"},
    {"cost.c_comp", "10"},
    {"cost.sim_seconds_per_example", "0.0001"},
    {"cost.server_seconds", "0"},
};

constexpr const char* kSweepKeys[] = {"sweep.eta",   "sweep.eta_s",  "sweep.epochs", "sweep.cohort",
                                      "sweep.metric", "sweep.goal", "sweep.seeds"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  const std::string& str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(key, "missing required key");
    return it->second;
  }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a number, got '" + s + "'");
    }
  }
  int integer(const std::string& key) const {
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 2e9) {
      throw ConfigError(key, "expected an integer, got '" + str(key) + "'");
    }
    return static_cast<int>(v);
  }
  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a nonnegative integer, got '" + s + "'");
    }
  }
  bool boolean(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + s + "'");
  }
  template <class T>
  T choice(const std::string& key, std::initializer_list<std::pair<const char*, T>> options) const {
    const std::string& s = str(key);
    std::string allowed;
    for (const auto& [name, value] : options) {
      if (s == name) return value;
      allowed += allowed.empty() ? name : std::string("|") + name;
    }
    throw ConfigError(key, "expected one of " + allowed + ", got '" + s + "'");
  }
  template <class T, class Fn>
  std::vector<T> list(const std::string& key, Fn parse_one) const {
    std::vector<T> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      KeyValues one{{key, item}};
      out.push_back(parse_one(Reader(one), key));
    }
    if (out.empty()) throw ConfigError(key, "grid must be nonempty");
    return out;
  }

 private:
  const KeyValues& kv_;
};

ExperimentConfig build_experiment(const Reader& r) {
  ExperimentConfig cfg;
  cfg.seed = r.u64("seed");
  cfg.rounds = r.integer("rounds");
  if (cfg.rounds < 0) throw ConfigError("rounds", "must be >= 0");
  cfg.stateful_override = r.boolean("stateful");
  cfg.eval_every = r.integer("eval.every");
  if (cfg.eval_every < 1) throw ConfigError("eval.every", "must be >= 1");

  ProblemSpec& p = cfg.problem;
  p.kind = r.choice<ProblemKind>("problem.kind", {{"quadratic", ProblemKind::kQuadratic},
                                                  {"glm", ProblemKind::kGlm},
                                                  {"partition", ProblemKind::kPartition}});
  p.quadratic.clients = r.integer("problem.clients");
  p.quadratic.dim = r.integer("problem.dim");
  p.quadratic.eig_min = r.real("problem.eig_min");
  p.quadratic.eig_max = r.real("problem.eig_max");
  p.quadratic.shared_curvature = r.boolean("problem.shared_curvature");
  p.quadratic.heterogeneity = r.real("problem.heterogeneity");
  p.quadratic.noise_sigma = r.real("problem.noise_sigma");
  if (p.quadratic.noise_sigma < 0.0) throw ConfigError("problem.noise_sigma", "must be >= 0");
  p.glm.clients = p.quadratic.clients;
  p.glm.dim = p.quadratic.dim;
  p.glm.alpha = r.real("problem.alpha");
  p.glm.beta = r.real("problem.beta");
  p.glm.samples_per_client = r.integer("problem.samples_per_client");
  p.glm.classes = r.integer("problem.classes");
  p.partition_file = r.str("problem.partition_file");
  p.shuffle_fraction = r.real("problem.shuffle");
  if (p.quadratic.clients < 1) throw ConfigError("problem.clients", "must be >= 1");
  if (p.quadratic.dim < 1) throw ConfigError("problem.dim", "must be >= 1");
  if (p.kind == ProblemKind::kPartition && p.partition_file.empty()) {
    throw ConfigError("problem.partition_file", "required for problem.kind = partition");
  }
  if (p.shuffle_fraction < 0.0 || p.shuffle_fraction > 1.0) {
    throw ConfigError("problem.shuffle", "must lie in [0, 1]");
  }

  LocalConfig& l = cfg.local;
  l.optimizer.kind = r.choice<ClientOptimizerKind>(
      "local.optimizer", {{"sgd", ClientOptimizerKind::kSgd},
                          {"sgdm", ClientOptimizerKind::kSgdMomentum},
                          {"adam", ClientOptimizerKind::kAdam},
                          {"adagrad", ClientOptimizerKind::kAdagrad}});
  l.optimizer.momentum = r.real("local.momentum");
  l.optimizer.beta1 = r.real("local.beta1");
  l.optimizer.beta2 = r.real("local.beta2");
  l.optimizer.eps = r.real("local.eps");
  l.lr = r.real("local.lr");
  if (!(l.lr > 0.0)) throw ConfigError("local.lr", "must be > 0");
  if (r.has("local.steps") && r.has("local.epochs")) {
    throw ConfigError("local.epochs", "set exactly one of local.steps and local.epochs");
  }
  if (r.has("local.epochs")) {
    l.duration_mode = DurationMode::kEpochs;
    l.duration = r.integer("local.epochs");
    if (l.duration < 1) throw ConfigError("local.epochs", "must be >= 1");
  } else {
    l.duration_mode = DurationMode::kSteps;
    l.duration = r.integer("local.steps");
    if (l.duration < 1) throw ConfigError("local.steps", "must be >= 1");
  }
  l.batch_size = r.integer("local.batch_size");
  if (l.batch_size < 1) throw ConfigError("local.batch_size", "must be >= 1");
  l.regularizer = r.choice<RegularizerKind>("local.regularizer",
                                            {{"none", RegularizerKind::kNone},
                                             {"prox", RegularizerKind::kProx},
                                             {"dane", RegularizerKind::kDane},
                                             {"dyn", RegularizerKind::kDyn}});
  l.mu = r.real("local.mu");
  if (l.mu < 0.0) throw ConfigError("local.mu", "must be >= 0");
  l.scaffold = r.boolean("local.scaffold");

  cfg.server.kind = r.choice<ServerOptimizerKind>("server.optimizer",
                                                  {{"sgd", ServerOptimizerKind::kSgd},
                                                   {"sgdm", ServerOptimizerKind::kSgdMomentum},
                                                   {"adam", ServerOptimizerKind::kAdam},
                                                   {"yogi", ServerOptimizerKind::kYogi}});
  cfg.server.momentum = r.real("server.momentum");
  cfg.server.beta1 = r.real("server.beta1");
  cfg.server.beta2 = r.real("server.beta2");
  cfg.server.eps = r.real("server.eps");
  cfg.server_lr = r.real("server.lr");
  if (!(cfg.server_lr > 0.0)) throw ConfigError("server.lr", "must be > 0");
  cfg.server_lr_decay = r.real("server.lr_decay");
  cfg.server_lr_decay_period = r.integer("server.lr_decay_period");

  SamplingSpec& s = cfg.sampling;
  s.scheme = r.choice<SamplingScheme>("sampling.scheme",
                                      {{"full", SamplingScheme::kFullParticipation},
                                       {"uniform", SamplingScheme::kUniformWithoutReplacement},
                                       {"weighted", SamplingScheme::kWeightedWithReplacement},
                                       {"diurnal", SamplingScheme::kDiurnal}});
  s.cohort = r.integer("sampling.cohort");
  s.period = r.integer("sampling.period");
  if (s.cohort < 1) throw ConfigError("sampling.cohort", "must be >= 1");
  if (s.period < 1) throw ConfigError("sampling.period", "must be >= 1");

  AggregationSpec& a = cfg.aggregation;
  const std::string weighting = r.str("aggregation.weighting");
  if (weighting == "auto") {
    a.weighting = sanctioned_weighting(s.scheme);
  } else {
    a.weighting = r.choice<Weighting>("aggregation.weighting",
                                      {{"example", Weighting::kExampleWeighted},
                                       {"uniform", Weighting::kUniform}});
  }
  a.normalization = r.choice<Normalization>("aggregation.normalization",
                                            {{"none", Normalization::kNone},
                                             {"fednova", Normalization::kFedNova}});
  cfg.unbiased_normalization = r.boolean("aggregation.unbiased");
  const double clip = r.real("aggregation.dp_clip");
  const double noise = r.real("aggregation.dp_noise");
  if (clip > 0.0) {
    a.dp = DpSpec{clip, noise};
    if (weighting == "auto") a.weighting = Weighting::kUniform;
    if (a.weighting != Weighting::kUniform) {
      throw ConfigError("aggregation.weighting", "dp requires uniform weighting");
    }
  } else if (clip < 0.0) {
    throw ConfigError("aggregation.dp_clip", "must be >= 0 (0 disables dp)");
  }
  if (noise < 0.0) throw ConfigError("aggregation.dp_noise", "must be >= 0");
  a.compression.kind = r.choice<CompressionKind>("aggregation.compression",
                                                 {{"none", CompressionKind::kNone},
                                                  {"quant", CompressionKind::kUnbiasedQuant},
                                                  {"topk", CompressionKind::kTopK}});
  a.compression.levels = r.integer("aggregation.levels");
  a.compression.k = r.integer("aggregation.topk");
  a.compression.error_feedback = r.boolean("aggregation.error_feedback");
  if (a.compression.kind == CompressionKind::kTopK && a.dp) {
    throw ConfigError("aggregation.compression", "topk cannot be combined with dp");
  }

  SplitSpec& sp = cfg.split;
  sp.mode = r.choice<SplitMode>("split.mode", {{"none", SplitMode::kNone},
                                               {"heldout", SplitMode::kHeldoutClients},
                                               {"within", SplitMode::kWithinClient}});
  sp.train_frac = r.real("split.train");
  sp.val_frac = r.real("split.val");
  sp.test_frac = r.real("split.test");

  cfg.cost.params.b_down = r.real("cost.b_down");
  cfg.cost.params.b_up = r.real("cost.b_up");
  cfg.cost.params.r_comp = r.real("cost.r_comp");
  cfg.cost.params.c_comp = r.real("cost.c_comp");
  cfg.cost.sim_seconds_per_example = r.real("cost.sim_seconds_per_example");
  cfg.cost.server_seconds = r.real("cost.server_seconds");

  if (l.scaffold && s.scheme != SamplingScheme::kFullParticipation && !cfg.stateful_override) {
    throw ConfigError("local.scaffold", "needs sampling.scheme = full unless stateful = true");
  }
  if (l.regularizer == RegularizerKind::kDyn && s.scheme != SamplingScheme::kFullParticipation &&
      !cfg.stateful_override) {
    throw ConfigError("local.regularizer", "dyn needs sampling.scheme = full unless stateful = true");
  }
  try {
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  return cfg;
}

SweepSpec build_sweep(const Reader& r) {
  SweepSpec sw;
  auto real = [](const Reader& one, const std::string& key) {
    const double v = one.real(key);
    if (!(v > 0.0)) throw ConfigError(key, "grid values must be > 0");
    return v;
  };
  auto positive_int = [](const Reader& one, const std::string& key) {
    const int v = one.integer(key);
    if (v < 1) throw ConfigError(key, "grid values must be >= 1");
    return v;
  };
  sw.eta_grid = r.list<double>("sweep.eta", real);
  sw.eta_s_grid = r.list<double>("sweep.eta_s", real);
  if (r.has("sweep.epochs")) sw.epochs_grid = r.list<int>("sweep.epochs", positive_int);
  if (r.has("sweep.cohort")) sw.cohort_grid = r.list<int>("sweep.cohort", positive_int);
  sw.metric = r.str("sweep.metric");
  const std::string goal = r.str("sweep.goal");
  if (goal == "auto") {
    const std::string suffix = "loss";
    sw.maximize = !(sw.metric.size() >= suffix.size() &&
                    sw.metric.compare(sw.metric.size() - suffix.size(), suffix.size(), suffix) == 0);
  } else {
    sw.maximize = r.choice<bool>("sweep.goal", {{"maximize", true}, {"minimize", false}});
  }
  sw.seeds = r.list<std::uint64_t>("sweep.seeds",
                                   [](const Reader& one, const std::string& key) { return one.u64(key); });
  return sw;
}

}  // namespace

std::size_t SweepSpec::cells() const {
  return eta_grid.size() * eta_s_grid.size() * std::max<std::size_t>(1, epochs_grid.size()) *
         std::max<std::size_t>(1, cohort_grid.size());
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (!section.empty()) key = section + "." + key;
    if (kv.count(key) > 0) throw ConfigError(key, "duplicate key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

ResolvedConfig resolve_config(const KeyValues& raw, bool allow_sweep) {
  for (const auto& [key, value] : raw) {
    bool known = key == "local.steps" || key == "local.epochs";
    for (const auto& k : kKeys) known = known || key == k.key;
    for (const char* k : kSweepKeys) known = known || (allow_sweep && key == k);
    if (!known) throw ConfigError(key, "unknown key");
  }
  KeyValues values = raw;
  for (const auto& k : kKeys) {
    if (values.count(k.key) > 0) continue;
    if (k.value == nullptr) throw ConfigError(k.key, "missing required key");
    values[k.key] = k.value;
  }
  if (values.count("local.steps") == 0 && values.count("local.epochs") == 0) {
    values["local.steps"] = "1";
  }
  ResolvedConfig out;
  if (allow_sweep) {
    if (values.count("sweep.eta_s") == 0) values["sweep.eta_s"] = values["server.lr"];
    if (values.count("sweep.eta") == 0) values["sweep.eta"] = values["local.lr"];
    if (values.count("sweep.metric") == 0) values["sweep.metric"] = "train_loss";
    if (values.count("sweep.goal") == 0) values["sweep.goal"] = "auto";
    if (values.count("sweep.seeds") == 0) values["sweep.seeds"] = values["seed"];
  }
  Reader reader(values);
  out.experiment = build_experiment(reader);
  if (allow_sweep) out.sweep = build_sweep(reader);
  out.values = std::move(values);
  return out;
}

ResolvedConfig load_config(const std::string& path, bool allow_sweep) {
  std::ifstream in(path);
  if (!in) throw ConfigError("path", "cannot open config file '" + path + "'");
  return resolve_config(parse_key_values(in), allow_sweep);
}

ResolvedConfig with_overrides(const ResolvedConfig& base, const KeyValues& overrides) {
  KeyValues values;
  for (const auto& [key, value] : base.values) {
    if (key.rfind("sweep.", 0) == 0) continue;
    values[key] = value;
  }
  if (overrides.count("local.epochs") > 0) values.erase("local.steps");
  if (overrides.count("local.steps") > 0) values.erase("local.epochs");
  for (const auto& [key, value] : overrides) values[key] = value;
  return resolve_config(values, false);
}

}  // namespace fedsim
