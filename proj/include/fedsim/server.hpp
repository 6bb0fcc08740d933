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

// ServerOpt: applies the pseudo-gradient g = -Δ to the global model.
//
//   sgd   x' = x - η_s g
//   sgdm  m' = β m + g;                         x' = x - η_s m'
//   adam  m' = β1 m + (1-β1) g; v' = β2 v + (1-β2) g²
//   yogi  m' as adam;           v' = v - (1-β2) sign(v - g²) g²
//         adam/yogi: x' = x - η_s m' / (√v' + ε), no bias correction.

#ifndef FEDSIM_SERVER_HPP_
#define FEDSIM_SERVER_HPP_

#include "fedsim/core.hpp"

namespace fedsim {

enum class ServerOptimizerKind { kSgd, kSgdMomentum, kAdam, kYogi };

struct ServerOptimizer {
  ServerOptimizerKind kind = ServerOptimizerKind::kSgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-3;
};

struct ServerState {
  ParamVector m;
  ParamVector v;  // entries stay >= 0
  int step_count = 0;
};

// Fresh state for a d-dimensional model. Yogi starts v at ε².
ServerState init_server_state(const ServerOptimizer& opt, Eigen::Index d);

struct ServerStepResult {
  ParamVector x;
  ServerState state;
};

ServerStepResult server_step(const ServerOptimizer& opt, const ParamVector& x,
                             const ParamVector& delta_agg, double eta_s,
                             const ServerState& state, int t);

// η_s · γ^⌊t / period⌋; period 0 disables decay.
double server_lr_at(double eta_s, double gamma, int period, int t);

}  // namespace fedsim

#endif  // FEDSIM_SERVER_HPP_
