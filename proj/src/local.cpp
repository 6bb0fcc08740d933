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

#include "fedsim/local.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace fedsim {

namespace {

void check_same(const ParamVector& a, const ParamVector& b, const char* what) {
  if (a.size() != b.size()) throw Error(std::string(what) + ": dimension mismatch");
}

// One ClientOpt update; state vectors start at zero each round.
class ClientStepper {
 public:
  ClientStepper(const ClientOptimizer& opt, double lr, Eigen::Index d)
      : opt_(opt), lr_(lr) {
    if (opt_.kind != ClientOptimizerKind::kSgd) {
      m_ = ParamVector::Zero(d);
      v_ = ParamVector::Zero(d);
    }
  }

  void apply(ParamVector& x, const ParamVector& g) {
    ++t_;
    switch (opt_.kind) {
      case ClientOptimizerKind::kSgd:
        x -= lr_ * g;
        break;
      case ClientOptimizerKind::kSgdMomentum:
        m_ = opt_.momentum * m_ + g;
        x -= lr_ * m_;
        break;
      case ClientOptimizerKind::kAdam: {
        m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * g;
        v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(opt_.beta1, t_);
        const double c2 = 1.0 - std::pow(opt_.beta2, t_);
        x.array() -= lr_ * (m_.array() / c1) /
                     ((v_.array() / c2).sqrt() + opt_.eps);
        break;
      }
      case ClientOptimizerKind::kAdagrad:
        v_ += g.cwiseProduct(g);
        x.array() -= lr_ * g.array() / (v_.array().sqrt() + opt_.eps);
        break;
    }
  }

 private:
  ClientOptimizer opt_;
  double lr_;
  int t_ = 0;
  ParamVector m_;
  ParamVector v_;
};

}  // namespace

void LocalConfig::validate() const {
  if (!(lr > 0.0)) throw Error("local.lr must be > 0");
  if (duration < 1) throw Error("local duration (steps/epochs) must be >= 1");
  if (batch_size < 1) throw Error("local.batch_size must be >= 1");
  if (mu < 0.0) throw Error("local.mu must be >= 0");
}

int planned_local_steps(const LocalConfig& cfg, std::int64_t num_examples) {
  if (cfg.duration_mode == DurationMode::kSteps) return cfg.duration;
  const std::int64_t per_epoch =
      (std::max<std::int64_t>(num_examples, 1) + cfg.batch_size - 1) /
      cfg.batch_size;
  return static_cast<int>(cfg.duration * per_epoch);
}

ParamVector regularizer_grad(RegularizerKind kind, const ParamVector& x,
                             const ParamVector& x_global,
                             const ParamVector* lambda, double mu,
                             const ParamVector* local_grad_at_global,
                             const ParamVector* dane_global_grad) {
  check_same(x, x_global, "regularizer_grad");
  switch (kind) {
    case RegularizerKind::kNone:
      return ParamVector::Zero(x.size());
    case RegularizerKind::kProx:
      return mu * (x - x_global);
    case RegularizerKind::kDyn:
      if (lambda == nullptr) throw Error("regularizer_grad: dyn requires lambda");
      check_same(x, *lambda, "regularizer_grad");
      return *lambda + mu * (x - x_global);
    case RegularizerKind::kDane:
      if (local_grad_at_global == nullptr || dane_global_grad == nullptr) {
        throw Error("regularizer_grad: dane requires local and global gradients");
      }
      check_same(x, *dane_global_grad, "regularizer_grad");
      return (*dane_global_grad - *local_grad_at_global) + mu * (x - x_global);
  }
  return ParamVector::Zero(x.size());
}

ParamVector scaffold_correct(const ParamVector& g, const ParamVector& server_cv,
                             const ParamVector& client_cv) {
  check_same(g, server_cv, "scaffold_correct");
  check_same(g, client_cv, "scaffold_correct");
  return g + (server_cv - client_cv);
}

ParamVector scaffold_update_cv(const ParamVector& client_cv,
                               const ParamVector& server_cv, double eta,
                               int tau, const ParamVector& x_global,
                               const ParamVector& x_local_final) {
  if (!(eta > 0.0) || tau < 1) {
    throw Error("scaffold_update_cv: requires eta > 0 and tau >= 1");
  }
  return client_cv - server_cv +
         (x_global - x_local_final) / (eta * static_cast<double>(tau));
}

ParamVector feddyn_update_lambda(const ParamVector& lambda, double mu,
                                 const ParamVector& x_local_final,
                                 const ParamVector& x_global) {
  return lambda + mu * (x_local_final - x_global);
}

LocalResult local_train(const FederatedProblem& problem, int client,
                        const ParamVector& x_global, const LocalConfig& cfg,
                        const ClientPersistentState& state,
                        const LocalContext& ctx, Rng& rng,
                        const StepObserver& observer) {
  const Eigen::Index d = x_global.size();
  if (cfg.scaffold && (!state.scaffold_cv || ctx.server_cv == nullptr)) {
    throw Error("local_train: scaffold requires client and server control variates");
  }
  if (cfg.regularizer == RegularizerKind::kDane && ctx.dane_global_grad == nullptr) {
    throw Error("local_train: dane requires the cohort gradient at x_global");
  }

  const std::int64_t n = problem.num_examples(client);
  const bool finite_data = std::holds_alternative<DatasetClient>(problem.clients[client]);
  if (finite_data && n == 0) throw Error("empty client dataset");
  const int tau = planned_local_steps(cfg, n);

  ParamVector local_grad_at_global;
  if (cfg.regularizer == RegularizerKind::kDane) {
    local_grad_at_global = client_grad(problem, client, x_global);
  }
  ParamVector zero_lambda;
  const ParamVector* lambda = nullptr;
  if (cfg.regularizer == RegularizerKind::kDyn) {
    if (state.dyn_lambda) {
      lambda = &*state.dyn_lambda;
    } else {
      zero_lambda = ParamVector::Zero(d);
      lambda = &zero_lambda;
    }
  }

  ClientStepper stepper(cfg.optimizer, cfg.lr, d);
  ParamVector x = x_global;
  std::int64_t examples = 0;

  auto step = [&](int k, std::span<const std::size_t> batch,
                  std::int64_t batch_examples) {
    ParamVector g = finite_data
                        ? batch_grad(problem, client, x, batch, rng)
                        : stochastic_grad(problem, client, x, cfg.batch_size, rng);
    if (cfg.regularizer != RegularizerKind::kNone) {
      g += regularizer_grad(cfg.regularizer, x, x_global, lambda, cfg.mu,
                            &local_grad_at_global, ctx.dane_global_grad);
    }
    if (cfg.scaffold) g = scaffold_correct(g, *ctx.server_cv, *state.scaffold_cv);
    stepper.apply(x, g);
    if (!all_finite(x)) throw DivergenceError(ctx.round, k, client);
    examples += batch_examples;
    if (observer) observer(k, x);
  };

  if (cfg.duration_mode == DurationMode::kSteps) {
    std::vector<std::size_t> idx;
    if (finite_data) {
      idx.resize(static_cast<std::size_t>(n));
    }
    const std::int64_t b =
        finite_data ? std::min<std::int64_t>(cfg.batch_size, n) : cfg.batch_size;
    for (int k = 1; k <= tau; ++k) {
      if (finite_data) {
        // Fresh uniform minibatch without replacement each step.
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::int64_t j = 0; j < b; ++j) {
          std::swap(idx[j], idx[j + rng.index(static_cast<std::size_t>(n - j))]);
        }
        step(k, std::span<const std::size_t>(idx.data(), static_cast<std::size_t>(b)), b);
      } else {
        step(k, {}, b);
      }
    }
  } else {
    const std::int64_t n_eff = std::max<std::int64_t>(n, 1);
    std::vector<std::size_t> order(static_cast<std::size_t>(n_eff));
    int k = 0;
    for (int epoch = 0; epoch < cfg.duration; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (finite_data) std::shuffle(order.begin(), order.end(), rng.engine());
      for (std::int64_t start = 0; start < n_eff; start += cfg.batch_size) {
        const std::int64_t len = std::min<std::int64_t>(cfg.batch_size, n_eff - start);
        step(++k, std::span<const std::size_t>(order.data() + start, static_cast<std::size_t>(len)),
             len);
      }
    }
  }

  LocalResult result;
  result.update.client_id = client;
  result.update.delta = x - x_global;
  result.update.local_steps = tau;
  result.update.examples_processed = examples;
  result.update.weight = static_cast<double>(examples);

  result.state = state;
  if (cfg.scaffold) {
    result.state.scaffold_cv = scaffold_update_cv(*state.scaffold_cv, *ctx.server_cv,
                                                  cfg.lr, tau, x_global, x);
  }
  if (cfg.regularizer == RegularizerKind::kDyn) {
    result.state.dyn_lambda = feddyn_update_lambda(*lambda, cfg.mu, x, x_global);
  }
  return result;
}

}  // namespace fedsim
