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

#include "fedsim/server.hpp"

#include <cmath>

namespace fedsim {

ServerState init_server_state(const ServerOptimizer& opt, Eigen::Index d) {
  ServerState s;
  s.m = ParamVector::Zero(d);
  s.v = opt.kind == ServerOptimizerKind::kYogi
            ? ParamVector::Constant(d, opt.eps * opt.eps)
            : ParamVector::Zero(d);
  return s;
}

ServerStepResult server_step(const ServerOptimizer& opt, const ParamVector& x,
                             const ParamVector& delta_agg, double eta_s,
                             const ServerState& state, int /*t*/) {
  if (!(eta_s > 0.0)) throw Error("server learning rate must be > 0");
  if (x.size() != delta_agg.size()) throw Error("server_step: dimension mismatch");
  const Eigen::Index d = x.size();
  ServerStepResult out;
  out.state = state;
  if (out.state.m.size() != d) out.state.m = ParamVector::Zero(d);
  if (out.state.v.size() != d) out.state.v = ParamVector::Zero(d);
  ++out.state.step_count;

  const ParamVector g = -delta_agg;
  switch (opt.kind) {
    case ServerOptimizerKind::kSgd:
      out.x = x - eta_s * g;
      break;
    case ServerOptimizerKind::kSgdMomentum:
      out.state.m = opt.momentum * out.state.m + g;
      out.x = x - eta_s * out.state.m;
      break;
    case ServerOptimizerKind::kAdam:
    case ServerOptimizerKind::kYogi: {
      out.state.m = opt.beta1 * out.state.m + (1.0 - opt.beta1) * g;
      const ParamVector g2 = g.cwiseProduct(g);
      if (opt.kind == ServerOptimizerKind::kAdam) {
        out.state.v = opt.beta2 * out.state.v + (1.0 - opt.beta2) * g2;
      } else {
        for (Eigen::Index k = 0; k < d; ++k) {
          const double diff = out.state.v[k] - g2[k];
          const double sign = (diff > 0.0) - (diff < 0.0);
          out.state.v[k] -= (1.0 - opt.beta2) * sign * g2[k];
        }
      }
      out.x = x.array() - eta_s * out.state.m.array() /
                              (out.state.v.array().sqrt() + opt.eps);
      break;
    }
  }
  return out;
}

double server_lr_at(double eta_s, double gamma, int period, int t) {
  if (period <= 0) return eta_s;
  return eta_s * std::pow(gamma, t / period);
}

}  // namespace fedsim
