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

#include "fedsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

namespace fedsim {

namespace {

constexpr double kBytesPerMb = 1e6;

// Runs fn(j) for j in [0, n) on up to `threads` workers. Rethrows the
// exception of the lowest failing index so errors are deterministic too.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t j) {
    try {
      fn(j);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t j = 0; j < n; ++j) guarded(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < n; j = next++) guarded(j);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

bool stateful(const LocalConfig& cfg) {
  return cfg.scaffold || cfg.regularizer == RegularizerKind::kDyn;
}

}  // namespace

FederatedProblem build_problem(const ProblemSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case ProblemKind::kQuadratic:
      return make_quadratic_problem(spec.quadratic, seed);
    case ProblemKind::kGlm:
      return make_glm_problem(spec.glm.clients, spec.glm.dim, spec.glm.alpha,
                              spec.glm.beta, spec.glm.samples_per_client, seed,
                              spec.glm.classes);
    case ProblemKind::kPartition: {
      std::ifstream in(spec.partition_file);
      if (!in) throw Error("cannot open partition file '" + spec.partition_file + "'");
      auto parts = read_partition(in);
      if (spec.shuffle_fraction > 0.0) parts = shuffle_mix(parts, spec.shuffle_fraction, seed);
      int labels = 0;
      int features = -1;
      for (const auto& p : parts) {
        labels = std::max(labels, num_labels(p));
        if (!p.empty() && features < 0) features = static_cast<int>(p.examples[0].features.size());
      }
      if (features < 0) throw Error("partition file has no examples");
      return problem_from_partition(parts, std::max(labels, 2), features);
    }
  }
  throw Error("unknown problem kind");
}

void SplitSpec::validate() const {
  auto in_unit = [](double f) { return f > 0.0 && f < 1.0; };
  if (mode == SplitMode::kHeldoutClients) {
    if (!in_unit(train_frac) || !in_unit(val_frac) || !in_unit(test_frac)) {
      throw Error("split fractions must lie in (0, 1)");
    }
    if (train_frac + val_frac + test_frac > 1.0 + 1e-12) {
      throw Error("split fractions must sum to at most 1");
    }
  } else if (mode == SplitMode::kWithinClient) {
    if (!(val_frac >= 0.0 && val_frac < 1.0)) {
      throw Error("split val fraction must lie in [0, 1)");
    }
  }
}

void ExperimentConfig::validate() const {
  local.validate();
  aggregation.validate();
  split.validate();
  cost.params.validate();
  if (rounds < 0) throw Error("rounds must be >= 0");
  if (eval_every < 1) throw Error("eval_every must be >= 1");
  if (!(server_lr > 0.0)) throw Error("server learning rate must be > 0");
  if (stateful(local) && sampling.scheme != SamplingScheme::kFullParticipation &&
      !stateful_override) {
    throw Error(
        "stateful client algorithms (scaffold, dyn) need full participation; "
        "set stateful = true to override");
  }
}

ClientSplit split_population(int num_clients, const SplitSpec& spec,
                             std::uint64_t seed) {
  spec.validate();
  ClientSplit out;
  std::vector<int> ids(num_clients);
  std::iota(ids.begin(), ids.end(), 0);
  if (spec.mode != SplitMode::kHeldoutClients) {
    out.train = ids;
    if (out.train.empty()) throw Error("empty split part: train");
    return out;
  }
  Rng rng(derive_stream(seed, 0, 0, Purpose::kSplit));
  std::shuffle(ids.begin(), ids.end(), rng.engine());
  auto count = [&](double f) {
    return static_cast<std::size_t>(std::floor(f * num_clients + 1e-9));
  };
  const std::size_t n_train = count(spec.train_frac);
  const std::size_t n_val = count(spec.val_frac);
  const std::size_t n_test = count(spec.test_frac);
  if (n_train == 0) throw Error("empty split part: train");
  if (n_val == 0) throw Error("empty split part: val");
  if (n_test == 0) throw Error("empty split part: test");
  out.train.assign(ids.begin(), ids.begin() + n_train);
  out.val.assign(ids.begin() + n_train, ids.begin() + n_train + n_val);
  out.test.assign(ids.begin() + n_train + n_val, ids.begin() + n_train + n_val + n_test);
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

DataSplit split_within_clients(const FederatedProblem& problem, double val_frac,
                               std::uint64_t seed) {
  if (!(val_frac >= 0.0 && val_frac < 1.0)) throw Error("val fraction must lie in [0, 1)");
  DataSplit out{problem, problem};
  for (int i = 0; i < problem.num_clients(); ++i) {
    auto* dc = std::get_if<DatasetClient>(&problem.clients[i]);
    if (dc == nullptr) continue;  // quadratic clients have no examples to split
    const std::size_t n = dc->data.size();
    const auto n_val = static_cast<std::size_t>(std::floor(val_frac * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_stream(seed, 0, static_cast<std::uint64_t>(i), Purpose::kSplit));
    std::shuffle(idx.begin(), idx.end(), rng.engine());
    auto& tr = std::get<DatasetClient>(out.train.clients[i]).data.examples;
    auto& va = std::get<DatasetClient>(out.val.clients[i]).data.examples;
    tr.clear();
    va.clear();
    for (std::size_t j = 0; j < n; ++j) {
      (j < n_val ? va : tr).push_back(dc->data.examples[idx[j]]);
    }
  }
  return out;
}

std::map<std::string, double> evaluate(const ParamVector& x,
                                       const FederatedProblem& problem,
                                       const std::vector<int>& clients,
                                       const std::string& prefix) {
  std::map<std::string, double> m;
  if (clients.empty()) return m;
  double loss = 0.0;
  double wsum = 0.0;
  for (int i : clients) {
    if (problem.classification() && problem.num_examples(i) == 0) continue;
    loss += problem.weights[i] * client_value(problem, i, x);
    wsum += problem.weights[i];
  }
  m[prefix + "_loss"] = wsum > 0.0 ? loss / wsum : 0.0;
  if (!problem.classification()) return m;

  std::int64_t correct = 0;
  std::int64_t total = 0;
  std::vector<double> per_client;
  for (int i : clients) {
    const auto& dc = std::get<DatasetClient>(problem.clients[i]);
    if (dc.data.empty()) continue;
    std::int64_t ok = 0;
    for (const auto& ex : dc.data.examples) {
      ok += softmax_predict(dc, x, ex.features) == ex.label;
    }
    correct += ok;
    total += static_cast<std::int64_t>(dc.data.size());
    per_client.push_back(static_cast<double>(ok) / static_cast<double>(dc.data.size()));
  }
  if (per_client.empty()) return m;
  m[prefix + "_accuracy"] = static_cast<double>(correct) / static_cast<double>(total);
  m[prefix + "_client_acc_mean"] =
      std::accumulate(per_client.begin(), per_client.end(), 0.0) /
      static_cast<double>(per_client.size());
  m[prefix + "_client_acc_min"] = *std::min_element(per_client.begin(), per_client.end());
  for (int dec = 1; dec <= 9; ++dec) {
    m[prefix + "_client_acc_p" + std::to_string(dec * 10)] = quantile(per_client, dec / 10.0);
  }
  return m;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FEDSIM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Experiment::Experiment(FederatedProblem problem, ExperimentConfig cfg,
                       std::optional<ParamVector> x0)
    : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (problem.clients.empty()) throw Error("problem has no clients");
  threads_ = resolve_thread_count(cfg_.threads);

  switch (cfg_.split.mode) {
    case SplitMode::kNone:
    case SplitMode::kHeldoutClients: {
      const ClientSplit s = split_population(problem.num_clients(), cfg_.split, cfg_.seed);
      train_clients_ = s.train;
      val_clients_ = s.val;
      test_clients_ = s.test;
      train_problem_ = std::move(problem);
      break;
    }
    case SplitMode::kWithinClient: {
      DataSplit s = split_within_clients(problem, cfg_.split.val_frac, cfg_.seed);
      train_problem_ = std::move(s.train);
      eval_problem_ = std::move(s.val);
      train_clients_.resize(train_problem_.num_clients());
      std::iota(train_clients_.begin(), train_clients_.end(), 0);
      val_clients_ = train_clients_;
      break;
    }
  }

  for (int id : train_clients_) {
    population_.push_back({id, train_problem_.num_examples(id), id % 2});
  }

  const Eigen::Index d = train_problem_.dim();
  x_ = x0 ? *x0 : ParamVector::Zero(d);
  if (x_.size() != d) throw Error("initial model dimension mismatch");
  server_state_ = init_server_state(cfg_.server, d);
  client_states_.resize(train_problem_.num_clients());
  if (cfg_.local.scaffold) {
    for (int id : train_clients_) client_states_[id].scaffold_cv = ParamVector::Zero(d);
    server_cv_ = ParamVector::Zero(d);
  }
  if (cfg_.local.regularizer == RegularizerKind::kDyn) {
    for (int id : train_clients_) client_states_[id].dyn_lambda = ParamVector::Zero(d);
  }
}

double Experiment::train_loss(const ParamVector& x) const {
  double loss = 0.0;
  double wsum = 0.0;
  for (int i : train_clients_) {
    loss += train_problem_.weights[i] * client_value(train_problem_, i, x);
    wsum += train_problem_.weights[i];
  }
  return wsum > 0.0 ? loss / wsum : 0.0;
}

std::map<std::string, double> Experiment::evaluate_model(const ParamVector& x) const {
  switch (cfg_.split.mode) {
    case SplitMode::kNone:
      return evaluate(x, train_problem_, train_clients_, "eval");
    case SplitMode::kWithinClient:
      return evaluate(x, *eval_problem_, val_clients_, "val");
    case SplitMode::kHeldoutClients: {
      auto m = evaluate(x, train_problem_, val_clients_, "val");
      m.merge(evaluate(x, train_problem_, test_clients_, "test"));
      return m;
    }
  }
  return {};
}

double Experiment::expected_weight(int client) const {
  if (cfg_.aggregation.weighting == Weighting::kUniform) return 1.0;
  const std::int64_t n = train_problem_.num_examples(client);
  const bool finite = std::holds_alternative<DatasetClient>(train_problem_.clients[client]);
  if (cfg_.local.duration_mode == DurationMode::kEpochs) {
    return static_cast<double>(cfg_.local.duration) * static_cast<double>(std::max<std::int64_t>(n, 1));
  }
  const std::int64_t b = finite ? std::min<std::int64_t>(cfg_.local.batch_size, n)
                                : cfg_.local.batch_size;
  return static_cast<double>(cfg_.local.duration) * static_cast<double>(b);
}

ParamVector Experiment::dane_cohort_gradient(const std::vector<int>& cohort) const {
  std::vector<ParamVector> grads(cohort.size());
  parallel_for(cohort.size(), threads_, [&](std::size_t j) {
    grads[j] = client_grad(train_problem_, cohort[j], x_);
  });
  ParamVector g = ParamVector::Zero(x_.size());
  for (const auto& gj : grads) g += gj;
  return g / static_cast<double>(cohort.size());
}

void Experiment::collect_shadow(int round,
                                const std::vector<std::vector<ParamVector>>& traces,
                                std::vector<ShadowPoint>* shadow) const {
  const std::size_t tau = traces.front().size();
  for (const auto& tr : traces) {
    if (tr.size() != tau) throw Error("shadow sequence needs equal local step counts");
  }
  const double m = static_cast<double>(traces.size());
  for (std::size_t k = 0; k < tau; ++k) {
    ParamVector mean = ParamVector::Zero(x_.size());
    for (const auto& tr : traces) mean += tr[k];
    mean /= m;
    ShadowPoint p;
    p.round = round;
    p.step = static_cast<int>(k) + 1;
    p.value = train_loss(mean);
    p.drift_sq.reserve(traces.size());
    for (const auto& tr : traces) p.drift_sq.push_back((tr[k] - mean).squaredNorm());
    shadow->push_back(std::move(p));
  }
}

RoundRecord Experiment::run_round(std::vector<ShadowPoint>* shadow) {
  const int t = round_;
  const Eigen::Index d = x_.size();
  const std::int64_t model_bytes = 8 * static_cast<std::int64_t>(d);

  Rng sample_rng(derive_stream(cfg_.seed, static_cast<std::uint64_t>(t), 0, Purpose::kSampling));
  const std::vector<int> cohort = sample_cohort(cfg_.sampling, population_, t, sample_rng);
  if (cohort.empty()) throw Error("empty cohort in round " + std::to_string(t));
  if (shadow != nullptr && cfg_.sampling.scheme != SamplingScheme::kFullParticipation) {
    throw Error("shadow sequence requires full participation");
  }

  ParamVector dane_grad;
  LocalContext base_ctx;
  base_ctx.round = t;
  if (cfg_.local.scaffold) base_ctx.server_cv = &server_cv_;
  if (cfg_.local.regularizer == RegularizerKind::kDane) {
    dane_grad = dane_cohort_gradient(cohort);
    base_ctx.dane_global_grad = &dane_grad;
  }

  std::vector<LocalResult> results(cohort.size());
  std::vector<std::vector<ParamVector>> traces(shadow != nullptr ? cohort.size() : 0);
  parallel_for(cohort.size(), threads_, [&](std::size_t j) {
    const int id = cohort[j];
    std::uint64_t occurrence = 0;
    for (std::size_t q = 0; q < j; ++q) occurrence += cohort[q] == id;
    std::uint64_t seed = derive_stream(cfg_.seed, static_cast<std::uint64_t>(t),
                                       static_cast<std::uint64_t>(id), Purpose::kLocalTraining);
    if (occurrence > 0) seed = derive_stream(seed, occurrence, 0, Purpose::kReplica);
    Rng rng(seed);
    LocalContext ctx = base_ctx;
    ctx.client_id = id;
    StepObserver observer;
    if (shadow != nullptr) {
      observer = [&traces, j](int, const ParamVector& xi) { traces[j].push_back(xi); };
    }
    results[j] = local_train(train_problem_, id, x_, cfg_.local, client_states_[id], ctx,
                             rng, observer);
  });

  // Per-client message sizes.
  std::int64_t extra_up = 0;
  std::int64_t down = model_bytes;
  if (cfg_.local.scaffold) {
    extra_up += model_bytes;
    down += model_bytes;
  }
  if (cfg_.local.regularizer == RegularizerKind::kDane) {
    extra_up += model_bytes;
    down += model_bytes;
  }

  std::vector<ClientUpdate> updates;
  updates.reserve(results.size());
  for (auto& r : results) updates.push_back(r.update);

  AggregationSpec agg = cfg_.aggregation;
  if (cfg_.unbiased_normalization &&
      (cfg_.sampling.scheme == SamplingScheme::kUniformWithoutReplacement ||
       cfg_.sampling.scheme == SamplingScheme::kDiurnal)) {
    double available = 0.0;
    double count = 0.0;
    const int group = cfg_.sampling.scheme == SamplingScheme::kDiurnal
                          ? available_group(t, cfg_.sampling.period)
                          : -1;
    for (const auto& c : population_) {
      if (group >= 0 && c.group != group) continue;
      available += expected_weight(c.id);
      count += 1.0;
    }
    agg.expected_weight_sum = available * static_cast<double>(cohort.size()) / count;
  }
  Rng agg_rng(derive_stream(cfg_.seed, static_cast<std::uint64_t>(t), 0, Purpose::kCompression));
  Rng noise_rng(derive_stream(cfg_.seed, static_cast<std::uint64_t>(t), 0, Purpose::kPrivacyNoise));
  AggregateOutput out = aggregate(updates, agg, agg_rng, &residuals_, &noise_rng);

  for (std::size_t j = 0; j < updates.size(); ++j) {
    updates[j].bytes_up = out.payload_bytes[j] + extra_up;
    updates[j].bytes_down = down;
  }

  // Persistent client state; with duplicates the last occurrence wins.
  for (std::size_t j = 0; j < cohort.size(); ++j) {
    if (stateful(cfg_.local)) client_states_[cohort[j]] = std::move(results[j].state);
  }
  ParamVector delta = std::move(out.delta);
  if (cfg_.local.regularizer == RegularizerKind::kDyn && cfg_.local.mu > 0.0) {
    // Server-side correction: x ← mean x_i + (1/μ) mean λ_i keeps the fixed
    // points of the surrogate problems stationary for F.
    ParamVector lambda_mean = ParamVector::Zero(d);
    for (int id : train_clients_) lambda_mean += *client_states_[id].dyn_lambda;
    lambda_mean /= static_cast<double>(train_clients_.size());
    delta += lambda_mean / cfg_.local.mu;
  }
  if (cfg_.local.scaffold) {
    server_cv_ = ParamVector::Zero(d);
    for (int id : train_clients_) server_cv_ += *client_states_[id].scaffold_cv;
    server_cv_ /= static_cast<double>(train_clients_.size());
  }

  if (shadow != nullptr) collect_shadow(t, traces, shadow);

  const double lr = server_lr_at(cfg_.server_lr, cfg_.server_lr_decay,
                                 cfg_.server_lr_decay_period, t);
  ServerStepResult step = server_step(cfg_.server, x_, delta, lr, server_state_, t);
  if (!all_finite(step.x)) throw DivergenceError(t, 0, -1);
  x_ = std::move(step.x);
  server_state_ = std::move(step.state);

  RoundRecord rec;
  rec.round = t;
  rec.train_loss = train_loss(x_);
  if ((t + 1) % cfg_.eval_every == 0 || t + 1 == cfg_.rounds) {
    rec.eval_metrics = evaluate_model(x_);
  }
  std::int64_t max_up = 0;
  std::vector<double> sim_times;
  for (const auto& u : updates) {
    cumulative_examples_ += u.examples_processed;
    cumulative_bytes_up_ += u.bytes_up;
    cumulative_bytes_down_ += u.bytes_down;
    max_up = std::max(max_up, u.bytes_up);
    sim_times.push_back(cfg_.cost.sim_seconds_per_example *
                        static_cast<double>(u.examples_processed));
  }
  rec.estimated_round_time_s =
      round_time(static_cast<double>(down) / kBytesPerMb, static_cast<double>(max_up) / kBytesPerMb,
                 sim_times, cfg_.cost.server_seconds, cfg_.cost.params);
  cumulative_time_s_ += rec.estimated_round_time_s;
  rec.cumulative_examples = cumulative_examples_;
  rec.cumulative_bytes_up = cumulative_bytes_up_;
  rec.cumulative_bytes_down = cumulative_bytes_down_;
  rec.cumulative_time_s = cumulative_time_s_;
  ++round_;
  return rec;
}

TrainingResult run_training(Experiment& experiment, int rounds, const RecordSink& sink) {
  TrainingResult result;
  for (int t = 0; t < rounds; ++t) {
    RoundRecord rec = experiment.run_round();
    if (sink) sink(rec);
    result.records.push_back(std::move(rec));
  }
  result.model = experiment.model();
  return result;
}

TrainingResult run_training(const ExperimentConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  Experiment experiment(build_problem(cfg.problem, cfg.seed), cfg);
  return run_training(experiment, cfg.rounds, sink);
}

std::vector<ShadowPoint> shadow_sequence(Experiment& experiment, int rounds) {
  if (experiment.config().sampling.scheme != SamplingScheme::kFullParticipation) {
    throw Error("shadow sequence requires full participation");
  }
  std::vector<ShadowPoint> points;
  for (int t = 0; t < rounds; ++t) experiment.run_round(&points);
  return points;
}

}  // namespace fedsim
