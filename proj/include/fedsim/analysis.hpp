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

// Convergence-bound evaluators for local SGD on convex L-smooth objectives,
// heterogeneity/smoothness estimators, and the per-round wall-clock model.

#ifndef FEDSIM_ANALYSIS_HPP_
#define FEDSIM_ANALYSIS_HPP_

#include <span>
#include <string>
#include <string_view>

#include "fedsim/core.hpp"
#include "fedsim/problems.hpp"

namespace fedsim {

struct TheoryConstants {
  double L = 1.0;      // smoothness
  double sigma = 0.0;  // gradient-noise std
  double zeta = 0.0;   // gradient heterogeneity bound
  double beta = 0.0;   // multiplicative heterogeneity term; recorded only
  double D = 1.0;      // ‖x0 - x*‖
  int M = 1;
  int tau = 1;
  int T = 1;
  double eta = 0.0;
};

// max_i max_probe ‖∇F_i(x) - ∇F(x)‖ with exact gradients.
double estimate_zeta(const FederatedProblem& problem,
                     std::span<const ParamVector> probes);

// max_i λ_max(A_i) by power iteration. Quadratic problems only.
double estimate_L(const FederatedProblem& problem);

// Largest eigenvalue of a symmetric PSD matrix by power iteration
// (tolerance 1e-10, at most 1000 iterations).
double power_iteration(const Matrix& a);

// D²/(2ητT) + ησ²/M + 4τη²Lσ² + 18τ²η²Lζ². Requires η <= 1/(4L).
double theorem1_rhs(const TheoryConstants& k);

// Learning rate minimizing the bound; branches with σ = 0 or ζ = 0 drop out.
double tuned_eta(const TheoryConstants& k);

// 18τ²η²ζ² + 4τη²σ².
double lemma2_bound(double eta, int tau, double zeta, double sigma);

// min{ (σ/(DL)) K^½/M², (σ/ζ) sqrt((σ/(DL)) K^½/M²) }.
double max_local_steps(double sigma, double D, double L, double zeta, double K,
                       int M);

struct CostModelParams {
  double b_down = 0.75;  // MB/s
  double b_up = 0.25;    // MB/s
  double r_comp = 7.0;
  double c_comp = 10.0;  // s

  void validate() const;
};

struct RoundTime {
  double comm_s = 0.0;
  double comp_s = 0.0;
  double total_s = 0.0;
};

// S_down/B_down + S_up/B_up + max_j(R_comp·T_sim_j + C_comp) + T_server.
RoundTime round_time_breakdown(double s_down_mb, double s_up_mb,
                               std::span<const double> client_sim_times,
                               double t_server, const CostModelParams& params);

double round_time(double s_down_mb, double s_up_mb,
                  std::span<const double> client_sim_times, double t_server,
                  const CostModelParams& params);

enum class Algorithm { kFedAvg, kFedAdam, kFedYogi, kFedPa, kScaffold, kMime, kMimeLite };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm a);

// Per-round, per-client message size in multiples of d.
struct MessageSizes {
  int down = 1;
  int up = 1;
  int total() const { return down + up; }
  bool full_batch_grad = false;  // grad evals τb + |D_i| instead of τb
};

MessageSizes message_sizes(Algorithm a);
std::string grad_evals_descriptor(Algorithm a);

}  // namespace fedsim

#endif  // FEDSIM_ANALYSIS_HPP_
