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

#include "fedsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedsim {

double estimate_zeta(const FederatedProblem& problem,
                     std::span<const ParamVector> probes) {
  if (probes.empty()) throw Error("estimate_zeta: no probe points");
  double zeta = 0.0;
  for (const ParamVector& x : probes) {
    const ParamVector g = global_grad(problem, x);
    for (int i = 0; i < problem.num_clients(); ++i) {
      zeta = std::max(zeta, (client_grad(problem, i, x) - g).norm());
    }
  }
  return zeta;
}

double power_iteration(const Matrix& a) {
  const Eigen::Index d = a.rows();
  if (d == 0) return 0.0;
  // Deterministic start with every eigen-direction represented.
  ParamVector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v[k] = 1.0 + 0.1 * static_cast<double>(k);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    ParamVector w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double next = v.dot(w);
    w /= norm;
    const bool converged = std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next));
    v = std::move(w);
    lambda = next;
    if (converged && it > 0) break;
  }
  return lambda;
}

double estimate_L(const FederatedProblem& problem) {
  if (!problem.all_quadratic()) throw Error("analytic L unavailable");
  double l = 0.0;
  for (const auto& c : problem.clients) {
    l = std::max(l, power_iteration(std::get<QuadraticClient>(c).A));
  }
  return l;
}

double theorem1_rhs(const TheoryConstants& k) {
  if (k.eta <= 0.0) throw Error("theorem1_rhs: eta must be > 0");
  if (k.L > 0.0 && k.eta > 1.0 / (4.0 * k.L) * (1.0 + 1e-12)) {
    throw Error("eta too large: theorem requires eta <= 1/(4L)");
  }
  const double eta = k.eta;
  const double tau = k.tau;
  const double s2 = k.sigma * k.sigma;
  const double z2 = k.zeta * k.zeta;
  return k.D * k.D / (2.0 * eta * tau * k.T) + eta * s2 / k.M +
         4.0 * tau * eta * eta * k.L * s2 + 18.0 * tau * tau * eta * eta * k.L * z2;
}

double tuned_eta(const TheoryConstants& k) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double tau = k.tau;
  const double T = k.T;
  const double b1 = k.L > 0.0 ? 1.0 / (4.0 * k.L) : kInf;
  const double b2 = k.sigma > 0.0
                        ? std::sqrt(static_cast<double>(k.M)) * k.D /
                              (std::sqrt(tau) * std::sqrt(T) * k.sigma)
                        : kInf;
  const double b3 = (k.sigma > 0.0 && k.L > 0.0)
                        ? std::pow(k.D, 2.0 / 3.0) /
                              (std::pow(tau, 2.0 / 3.0) * std::cbrt(T) *
                               std::cbrt(k.L) * std::pow(k.sigma, 2.0 / 3.0))
                        : kInf;
  const double b4 = (k.zeta > 0.0 && k.L > 0.0)
                        ? std::pow(k.D, 2.0 / 3.0) /
                              (tau * std::cbrt(T) * std::cbrt(k.L) *
                               std::pow(k.zeta, 2.0 / 3.0))
                        : kInf;
  return std::min({b1, b2, b3, b4});
}

double lemma2_bound(double eta, int tau, double zeta, double sigma) {
  const double t = tau;
  return 18.0 * t * t * eta * eta * zeta * zeta + 4.0 * t * eta * eta * sigma * sigma;
}

double max_local_steps(double sigma, double D, double L, double zeta, double K,
                       int M) {
  const double m2 = static_cast<double>(M) * M;
  const double first = sigma / (D * L) * std::sqrt(K) / m2;
  if (zeta == 0.0) return first;
  if (std::isinf(zeta)) return 0.0;
  return std::min(first, sigma / zeta * std::sqrt(first));
}

void CostModelParams::validate() const {
  if (!(b_down > 0.0) || !(b_up > 0.0) || !(r_comp > 0.0) || !(c_comp > 0.0)) {
    throw Error("cost model parameters must be strictly positive");
  }
}

RoundTime round_time_breakdown(double s_down_mb, double s_up_mb,
                               std::span<const double> client_sim_times,
                               double t_server, const CostModelParams& params) {
  params.validate();
  if (client_sim_times.empty()) throw Error("round_time: empty cohort");
  RoundTime rt;
  rt.comm_s = s_down_mb / params.b_down + s_up_mb / params.b_up;
  double slowest = -std::numeric_limits<double>::infinity();
  for (double t : client_sim_times) {
    slowest = std::max(slowest, params.r_comp * t + params.c_comp);
  }
  rt.comp_s = slowest + t_server;
  rt.total_s = rt.comm_s + rt.comp_s;
  return rt;
}

double round_time(double s_down_mb, double s_up_mb,
                  std::span<const double> client_sim_times, double t_server,
                  const CostModelParams& params) {
  return round_time_breakdown(s_down_mb, s_up_mb, client_sim_times, t_server,
                              params)
      .total_s;
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "fedavg") return Algorithm::kFedAvg;
  if (name == "fedadam") return Algorithm::kFedAdam;
  if (name == "fedyogi") return Algorithm::kFedYogi;
  if (name == "fedpa") return Algorithm::kFedPa;
  if (name == "scaffold") return Algorithm::kScaffold;
  if (name == "mime") return Algorithm::kMime;
  if (name == "mimelite") return Algorithm::kMimeLite;
  throw Error("unknown algorithm '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedAdam: return "fedadam";
    case Algorithm::kFedYogi: return "fedyogi";
    case Algorithm::kFedPa: return "fedpa";
    case Algorithm::kScaffold: return "scaffold";
    case Algorithm::kMime: return "mime";
    case Algorithm::kMimeLite: return "mimelite";
  }
  return "unknown";
}

MessageSizes message_sizes(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg:
    case Algorithm::kFedAdam:
    case Algorithm::kFedYogi:
    case Algorithm::kFedPa:
      return {1, 1, false};
    case Algorithm::kScaffold:
      // x and c down; Δx and Δc up.
      return {2, 2, false};
    case Algorithm::kMime:
      return {2, 2, true};
    case Algorithm::kMimeLite:
      return {2, 1, true};
  }
  throw Error("unknown algorithm");
}

std::string grad_evals_descriptor(Algorithm a) {
  return message_sizes(a).full_batch_grad ? "tau*b+|D_i|" : "tau*b";
}

}  // namespace fedsim
