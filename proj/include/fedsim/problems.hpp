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

// Synthetic federated problems with analytic oracles.
//
// Two client objective families are supported:
//   * quadratics F_i(x) = ½ (x - c_i)ᵀ A_i (x - c_i), with optional isotropic
//     Gaussian gradient noise of total variance σ²;
//   * multinomial logistic regression over a finite labeled dataset (used for
//     the Gaussian GLM generator and for partitioned datasets).
// The global objective is F(x) = Σ p_i F_i(x).

#ifndef FEDSIM_PROBLEMS_HPP_
#define FEDSIM_PROBLEMS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "fedsim/core.hpp"

namespace fedsim {

struct QuadraticClient {
  Matrix A;  // symmetric PSD
  ParamVector c;
  std::int64_t num_examples = 1;
};

struct Example {
  ParamVector features;
  int label = 0;
};

struct LabeledDataset {
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

// Softmax regression client. Model layout: `classes` rows of
// `feature_dim` weights (row-major), followed by `classes` biases.
struct DatasetClient {
  LabeledDataset data;
  int classes = 2;
  int feature_dim = 1;
};

// Generator draws behind one GLM client, kept for inspection.
struct GlmClientParams {
  double model_mean = 0.0;    // u_i
  double feature_shift = 0.0; // B_i
  ParamVector mu;
  ParamVector sigma_diag;
  Matrix W;
  ParamVector b;
};

using ClientObjective = std::variant<QuadraticClient, DatasetClient>;

struct FederatedProblem {
  std::vector<ClientObjective> clients;
  std::vector<double> weights;  // p_i, sums to 1
  double noise_sigma = 0.0;     // quadratic gradient-noise std
  std::vector<GlmClientParams> glm;

  int num_clients() const { return static_cast<int>(clients.size()); }
  Eigen::Index dim() const;
  bool all_quadratic() const;
  bool classification() const;
  std::int64_t num_examples(int client) const;
};

inline Eigen::Index softmax_dim(int classes, int feature_dim) {
  return static_cast<Eigen::Index>(classes) * (feature_dim + 1);
}

double quadratic_value(const QuadraticClient& client, const ParamVector& x);
ParamVector quadratic_grad(const QuadraticClient& client, const ParamVector& x);

// Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition;
// eigenvalues below 1e-10·λ_max are treated as zero.
Matrix symmetric_pinv(const Matrix& a);

// A† A c.
ParamVector client_optimum(const QuadraticClient& client);
// (Σ p_i A_i)† (Σ p_i A_i c_i). Requires an all-quadratic problem.
ParamVector global_optimum(const FederatedProblem& problem);

double softmax_loss(const DatasetClient& client, const ParamVector& x);
// Mean cross-entropy gradient over the selected example indices.
ParamVector softmax_grad(const DatasetClient& client, const ParamVector& x,
                         std::span<const std::size_t> batch);
ParamVector softmax_full_grad(const DatasetClient& client, const ParamVector& x);
int softmax_predict(const DatasetClient& client, const ParamVector& x,
                    const ParamVector& features);

double client_value(const FederatedProblem& problem, int client,
                    const ParamVector& x);
ParamVector client_grad(const FederatedProblem& problem, int client,
                        const ParamVector& x);
double global_value(const FederatedProblem& problem, const ParamVector& x);
ParamVector global_grad(const FederatedProblem& problem, const ParamVector& x);

// Unbiased estimate of ∇F_i(x). Dataset clients average over `batch_size`
// examples drawn without replacement; quadratic clients return the exact
// gradient plus N(0, σ²/d · I) noise.
ParamVector stochastic_grad(const FederatedProblem& problem, int client,
                            const ParamVector& x, int batch_size, Rng& rng);
// Gradient over an explicit minibatch (dataset clients). Quadratic clients
// ignore the indices and behave as stochastic_grad.
ParamVector batch_grad(const FederatedProblem& problem, int client,
                       const ParamVector& x,
                       std::span<const std::size_t> batch, Rng& rng);

struct QuadraticSpec {
  int clients = 4;
  int dim = 10;
  double eig_min = 0.5;
  double eig_max = 2.0;
  bool shared_curvature = true;  // one A for every client
  double heterogeneity = 1.0;    // std of the c_i entries
  double noise_sigma = 0.0;
};

FederatedProblem make_quadratic_problem(const QuadraticSpec& spec,
                                        std::uint64_t seed);

FederatedProblem make_glm_problem(int clients, int dim, double alpha,
                                  double beta, int n_per_client,
                                  std::uint64_t seed, int classes = 10);

// Builds a softmax-regression problem with p_i ∝ |D_i|.
FederatedProblem problem_from_partition(
    const std::vector<LabeledDataset>& partition, int classes,
    int feature_dim);

// Label-Dirichlet partitioning. When `proportions` is non-null it receives
// each client's drawn label distribution q_i.
std::vector<LabeledDataset> dirichlet_partition(
    const LabeledDataset& dataset, int clients, double alpha,
    std::uint64_t seed,
    std::vector<std::vector<double>>* proportions = nullptr);

// Each client surrenders floor(s·n_i) uniformly chosen examples to a shared
// pool and receives the same number back from the shuffled pool.
std::vector<LabeledDataset> shuffle_mix(
    const std::vector<LabeledDataset>& partition, double s,
    std::uint64_t seed);

int num_labels(const LabeledDataset& dataset);
std::vector<std::int64_t> label_histogram(const LabeledDataset& dataset,
                                          int labels);

// Columnar text formats. Dataset rows are `label,f0,...`; partition rows are
// `client_id,label,f0,...`, preceded by a `# clients=M features=d` line so
// empty clients survive a round trip.
void write_dataset(std::ostream& out, const LabeledDataset& dataset);
LabeledDataset read_dataset(std::istream& in);
void write_partition(std::ostream& out,
                     const std::vector<LabeledDataset>& partition);
std::vector<LabeledDataset> read_partition(std::istream& in);

}  // namespace fedsim

#endif  // FEDSIM_PROBLEMS_HPP_
