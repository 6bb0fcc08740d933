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

#ifndef FEDSIM_LOCAL_HPP_
#define FEDSIM_LOCAL_HPP_

#include <functional>
#include <optional>

#include "fedsim/core.hpp"
#include "fedsim/problems.hpp"

namespace fedsim {

enum class ClientOptimizerKind { kSgd, kSgdMomentum, kAdam, kAdagrad };

struct ClientOptimizer {
  ClientOptimizerKind kind = ClientOptimizerKind::kSgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

enum class RegularizerKind { kNone, kProx, kDane, kDyn };

enum class DurationMode { kSteps, kEpochs };

struct LocalConfig {
  ClientOptimizer optimizer;
  double lr = 0.1;
  DurationMode duration_mode = DurationMode::kSteps;
  int duration = 1;  // τ in steps mode, E in epochs mode
  int batch_size = 1;
  RegularizerKind regularizer = RegularizerKind::kNone;
  double mu = 0.0;
  bool scaffold = false;

  void validate() const;
};

// State a client keeps across rounds. Only used by cross-silo algorithms.
struct ClientPersistentState {
  std::optional<ParamVector> scaffold_cv;
  std::optional<ParamVector> dyn_lambda;
};

// Per-round inputs broadcast by the server beyond the model itself.
struct LocalContext {
  const ParamVector* server_cv = nullptr;
  const ParamVector* dane_global_grad = nullptr;
  int round = 0;
  int client_id = 0;
};

// Called after local step k (1-based) with the client iterate x_i^(t,k).
using StepObserver = std::function<void(int k, const ParamVector& x)>;

struct LocalResult {
  ClientUpdate update;
  ClientPersistentState state;
};

// Number of local steps the config implies for a client with n examples.
int planned_local_steps(const LocalConfig& cfg, std::int64_t num_examples);

// Runs ClientOpt from x_global. Optimizer state starts from defaults every
// call. Throws DivergenceError on the first non-finite iterate.
LocalResult local_train(const FederatedProblem& problem, int client,
                        const ParamVector& x_global, const LocalConfig& cfg,
                        const ClientPersistentState& state,
                        const LocalContext& ctx, Rng& rng,
                        const StepObserver& observer = {});

// Gradient of the regularizer ψ_i(x, x_global).
ParamVector regularizer_grad(RegularizerKind kind, const ParamVector& x,
                             const ParamVector& x_global,
                             const ParamVector* lambda, double mu,
                             const ParamVector* local_grad_at_global,
                             const ParamVector* dane_global_grad);

// g + c - c_i.
ParamVector scaffold_correct(const ParamVector& g, const ParamVector& server_cv,
                             const ParamVector& client_cv);

// c_i - c + (x_global - x_local_final) / (η τ).
ParamVector scaffold_update_cv(const ParamVector& client_cv,
                               const ParamVector& server_cv, double eta,
                               int tau, const ParamVector& x_global,
                               const ParamVector& x_local_final);

// λ + μ (x_local_final - x_global).
ParamVector feddyn_update_lambda(const ParamVector& lambda, double mu,
                                 const ParamVector& x_local_final,
                                 const ParamVector& x_global);

}  // namespace fedsim

#endif  // FEDSIM_LOCAL_HPP_
