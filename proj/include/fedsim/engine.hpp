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

// The round loop of generalized FedAvg:
//
//   for t in 0..T-1:
//     S   <- sample_cohort(t)
//     Δ_i <- ClientOpt run from x on each i in S          (parallel)
//     Δ   <- aggregate({Δ_i})                              (fixed order)
//     x   <- ServerOpt(x, -Δ)
//
// All cross-round state (model, server optimizer, client control variates,
// FedDyn multipliers, error-feedback residuals) lives in Experiment. Client
// work may run on several threads; every random draw comes from a stream
// derived from (seed, round, client, purpose) and reductions run in
// ascending client order, so results do not depend on the thread count.

#ifndef FEDSIM_ENGINE_HPP_
#define FEDSIM_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/aggregate.hpp"
#include "fedsim/analysis.hpp"
#include "fedsim/core.hpp"
#include "fedsim/local.hpp"
#include "fedsim/problems.hpp"
#include "fedsim/sampling.hpp"
#include "fedsim/server.hpp"

namespace fedsim {

enum class ProblemKind { kQuadratic, kGlm, kPartition };

struct GlmSpec {
  int clients = 10;
  int dim = 10;
  double alpha = 0.0;
  double beta = 0.0;
  int samples_per_client = 50;
  int classes = 10;
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::kQuadratic;
  QuadraticSpec quadratic;
  GlmSpec glm;
  std::string partition_file;
  double shuffle_fraction = 0.0;  // shuffle_mix applied after loading
};

FederatedProblem build_problem(const ProblemSpec& spec, std::uint64_t seed);

enum class SplitMode { kNone, kHeldoutClients, kWithinClient };

struct SplitSpec {
  SplitMode mode = SplitMode::kNone;
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;

  void validate() const;
};

struct CostSettings {
  CostModelParams params;
  // Simulated client compute time per processed example. A fixed rate keeps
  // the time axis deterministic.
  double sim_seconds_per_example = 1e-4;
  double server_seconds = 0.0;
};

struct ExperimentConfig {
  ProblemSpec problem;
  LocalConfig local;
  ServerOptimizer server;
  double server_lr = 1.0;
  double server_lr_decay = 1.0;
  int server_lr_decay_period = 0;
  AggregationSpec aggregation;
  // Divide by the expected cohort weight instead of the realized one when
  // sampling uniformly without replacement.
  bool unbiased_normalization = false;
  SamplingSpec sampling;
  int rounds = 1;
  int eval_every = 10;
  SplitSpec split;
  std::uint64_t seed = 0;
  CostSettings cost;
  // Permit stateful client algorithms under partial participation.
  bool stateful_override = false;
  int threads = 0;  // 0: FEDSIM_THREADS or hardware concurrency

  void validate() const;
};

struct ClientSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Disjoint split of client ids by shuffled order. Part sizes are
// floor(frac · M); any empty part is an error.
ClientSplit split_population(int num_clients, const SplitSpec& spec,
                             std::uint64_t seed);

struct DataSplit {
  FederatedProblem train;
  FederatedProblem val;
};

// Per-client example split: floor(val_frac · n_i) examples go to validation.
DataSplit split_within_clients(const FederatedProblem& problem, double val_frac,
                               std::uint64_t seed);

// Loss over `clients` (weights renormalized) and, for classification, the
// overall accuracy plus the per-client accuracy mean, min and deciles. Keys
// are prefixed with `prefix` + "_".
std::map<std::string, double> evaluate(const ParamVector& x,
                                       const FederatedProblem& problem,
                                       const std::vector<int>& clients,
                                       const std::string& prefix);

// Value of F at the shadow iterate x̄^(t,k) = mean_i x_i^(t,k), and each
// client's ‖x_i^(t,k) - x̄^(t,k)‖².
struct ShadowPoint {
  int round = 0;
  int step = 0;  // k in 1..τ
  double value = 0.0;
  std::vector<double> drift_sq;
};

int resolve_thread_count(int requested);

class Experiment {
 public:
  Experiment(FederatedProblem problem, ExperimentConfig cfg,
             std::optional<ParamVector> x0 = std::nullopt);

  const ParamVector& model() const { return x_; }
  const FederatedProblem& problem() const { return train_problem_; }
  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<int>& train_clients() const { return train_clients_; }
  int next_round() const { return round_; }
  const ClientPersistentState& client_state(int client) const {
    return client_states_.at(client);
  }
  const ParamVector& server_cv() const { return server_cv_; }

  // Runs one round. When `shadow` is non-null, appends one point per local
  // step (full participation with equal local step counts only).
  RoundRecord run_round(std::vector<ShadowPoint>* shadow = nullptr);

  // Metrics on the configured evaluation split(s).
  std::map<std::string, double> evaluate_model(const ParamVector& x) const;
  double train_loss(const ParamVector& x) const;

 private:
  ParamVector dane_cohort_gradient(const std::vector<int>& cohort) const;
  double expected_weight(int client) const;
  void collect_shadow(int round, const std::vector<std::vector<ParamVector>>& traces,
                      std::vector<ShadowPoint>* shadow) const;

  ExperimentConfig cfg_;
  FederatedProblem train_problem_;
  std::optional<FederatedProblem> eval_problem_;  // within-client split
  std::vector<int> train_clients_;
  std::vector<int> val_clients_;
  std::vector<int> test_clients_;
  std::vector<ClientDescriptor> population_;
  int threads_ = 1;

  ParamVector x_;
  ServerState server_state_;
  std::vector<ClientPersistentState> client_states_;
  ParamVector server_cv_;
  ResidualStore residuals_;
  int round_ = 0;
  std::int64_t cumulative_examples_ = 0;
  std::int64_t cumulative_bytes_up_ = 0;
  std::int64_t cumulative_bytes_down_ = 0;
  double cumulative_time_s_ = 0.0;
};

struct TrainingResult {
  ParamVector model;
  std::vector<RoundRecord> records;
};

using RecordSink = std::function<void(const RoundRecord&)>;

TrainingResult run_training(const ExperimentConfig& cfg,
                            const RecordSink& sink = {});
TrainingResult run_training(Experiment& experiment, int rounds,
                            const RecordSink& sink = {});

// Shadow-sequence trace over `rounds` rounds. Requires full participation
// and equal local step counts.
std::vector<ShadowPoint> shadow_sequence(Experiment& experiment, int rounds);

}  // namespace fedsim

#endif  // FEDSIM_ENGINE_HPP_
