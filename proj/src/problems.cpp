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

#include "fedsim/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace fedsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const ParamVector& x, Eigen::Index d, const char* what) {
  if (x.size() != d) {
    throw Error(std::string(what) + ": dimension mismatch (expected " +
                std::to_string(d) + ", got " + std::to_string(x.size()) + ")");
  }
}

// Logits W·f + b for the flattened softmax model.
ParamVector logits(const DatasetClient& client, const ParamVector& x,
                   const ParamVector& features) {
  const int k = client.classes;
  const int f = client.feature_dim;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      w(x.data(), k, f);
  return w * features + x.segment(static_cast<Eigen::Index>(k) * f, k);
}

// Numerically stable softmax probabilities; also returns log-sum-exp.
ParamVector softmax(const ParamVector& z, double* lse) {
  const double m = z.maxCoeff();
  ParamVector p = (z.array() - m).exp().matrix();
  const double s = p.sum();
  if (lse != nullptr) *lse = m + std::log(s);
  return p / s;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("parse error on line " + std::to_string(line_no) +
                ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, std::size_t line_no) {
  const double v = parse_double(s, line_no);
  if (v != std::floor(v) || v < 0) {
    throw Error("parse error on line " + std::to_string(line_no) +
                ": expected a nonnegative integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

// Log of a Gamma(alpha, 1) draw, stable for tiny alpha:
// G = G' · U^(1/alpha) with G' ~ Gamma(alpha + 1).
double log_gamma_draw(double alpha, Rng& rng) {
  std::gamma_distribution<double> g(alpha + 1.0, 1.0);
  const double base = g(rng.engine());
  double u = rng.uniform();
  while (u <= 0.0) u = rng.uniform();
  return std::log(base) + std::log(u) / alpha;
}

}  // namespace

Eigen::Index FederatedProblem::dim() const {
  if (clients.empty()) return 0;
  return std::visit(
      Overloaded{[](const QuadraticClient& q) { return q.c.size(); },
                 [](const DatasetClient& c) {
                   return softmax_dim(c.classes, c.feature_dim);
                 }},
      clients.front());
}

bool FederatedProblem::all_quadratic() const {
  return std::all_of(clients.begin(), clients.end(), [](const auto& c) {
    return std::holds_alternative<QuadraticClient>(c);
  });
}

bool FederatedProblem::classification() const {
  return !clients.empty() &&
         std::holds_alternative<DatasetClient>(clients.front());
}

std::int64_t FederatedProblem::num_examples(int client) const {
  return std::visit(
      Overloaded{[](const QuadraticClient& q) { return q.num_examples; },
                 [](const DatasetClient& c) {
                   return static_cast<std::int64_t>(c.data.size());
                 }},
      clients.at(client));
}

double quadratic_value(const QuadraticClient& client, const ParamVector& x) {
  check_dim(x, client.c.size(), "quadratic_value");
  const ParamVector r = x - client.c;
  return 0.5 * r.dot(client.A * r);
}

ParamVector quadratic_grad(const QuadraticClient& client, const ParamVector& x) {
  check_dim(x, client.c.size(), "quadratic_grad");
  return client.A * (x - client.c);
}

Matrix symmetric_pinv(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const ParamVector& lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  ParamVector inv = ParamVector::Zero(lambda.size());
  if (lmax > 0.0) {
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      if (lambda[k] > 1e-10 * lmax) inv[k] = 1.0 / lambda[k];
    }
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

ParamVector client_optimum(const QuadraticClient& client) {
  return symmetric_pinv(client.A) * (client.A * client.c);
}

ParamVector global_optimum(const FederatedProblem& problem) {
  if (!problem.all_quadratic() || problem.clients.empty()) {
    throw Error("global_optimum requires an all-quadratic problem");
  }
  const Eigen::Index d = problem.dim();
  Matrix a_bar = Matrix::Zero(d, d);
  ParamVector b = ParamVector::Zero(d);
  for (int i = 0; i < problem.num_clients(); ++i) {
    const auto& q = std::get<QuadraticClient>(problem.clients[i]);
    a_bar += problem.weights[i] * q.A;
    b += problem.weights[i] * (q.A * q.c);
  }
  return symmetric_pinv(a_bar) * b;
}

double softmax_loss(const DatasetClient& client, const ParamVector& x) {
  check_dim(x, softmax_dim(client.classes, client.feature_dim), "softmax_loss");
  if (client.data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : client.data.examples) {
    const ParamVector z = logits(client, x, ex.features);
    double lse = 0.0;
    softmax(z, &lse);
    total += lse - z[ex.label];
  }
  return total / static_cast<double>(client.data.size());
}

ParamVector softmax_grad(const DatasetClient& client, const ParamVector& x,
                         std::span<const std::size_t> batch) {
  const Eigen::Index d = softmax_dim(client.classes, client.feature_dim);
  check_dim(x, d, "softmax_grad");
  if (batch.empty()) throw Error("empty client dataset");
  const int k = client.classes;
  const int f = client.feature_dim;
  ParamVector g = ParamVector::Zero(d);
  for (std::size_t idx : batch) {
    const Example& ex = client.data.examples.at(idx);
    ParamVector p = softmax(logits(client, x, ex.features), nullptr);
    p[ex.label] -= 1.0;
    for (int c = 0; c < k; ++c) {
      g.segment(static_cast<Eigen::Index>(c) * f, f) += p[c] * ex.features;
    }
    g.segment(static_cast<Eigen::Index>(k) * f, k) += p;
  }
  return g / static_cast<double>(batch.size());
}

ParamVector softmax_full_grad(const DatasetClient& client,
                              const ParamVector& x) {
  std::vector<std::size_t> all(client.data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return softmax_grad(client, x, all);
}

int softmax_predict(const DatasetClient& client, const ParamVector& x,
                    const ParamVector& features) {
  Eigen::Index best = 0;
  logits(client, x, features).maxCoeff(&best);
  return static_cast<int>(best);
}

double client_value(const FederatedProblem& problem, int client,
                    const ParamVector& x) {
  return std::visit(
      Overloaded{
          [&](const QuadraticClient& q) { return quadratic_value(q, x); },
          [&](const DatasetClient& c) { return softmax_loss(c, x); }},
      problem.clients.at(client));
}

ParamVector client_grad(const FederatedProblem& problem, int client,
                        const ParamVector& x) {
  return std::visit(
      Overloaded{
          [&](const QuadraticClient& q) { return quadratic_grad(q, x); },
          [&](const DatasetClient& c) { return softmax_full_grad(c, x); }},
      problem.clients.at(client));
}

double global_value(const FederatedProblem& problem, const ParamVector& x) {
  double total = 0.0;
  for (int i = 0; i < problem.num_clients(); ++i) {
    total += problem.weights[i] * client_value(problem, i, x);
  }
  return total;
}

ParamVector global_grad(const FederatedProblem& problem, const ParamVector& x) {
  ParamVector g = ParamVector::Zero(problem.dim());
  for (int i = 0; i < problem.num_clients(); ++i) {
    g += problem.weights[i] * client_grad(problem, i, x);
  }
  return g;
}

ParamVector batch_grad(const FederatedProblem& problem, int client,
                       const ParamVector& x,
                       std::span<const std::size_t> batch, Rng& rng) {
  return std::visit(
      Overloaded{[&](const QuadraticClient& q) {
                   ParamVector g = quadratic_grad(q, x);
                   if (problem.noise_sigma > 0.0) {
                     const double std_per_coord =
                         problem.noise_sigma /
                         std::sqrt(static_cast<double>(g.size()));
                     g += rng.normal_vector(g.size(), std_per_coord);
                   }
                   return g;
                 },
                 [&](const DatasetClient& c) {
                   return softmax_grad(c, x, batch);
                 }},
      problem.clients.at(client));
}

ParamVector stochastic_grad(const FederatedProblem& problem, int client,
                            const ParamVector& x, int batch_size, Rng& rng) {
  if (batch_size < 1) throw Error("stochastic_grad: batch_size must be >= 1");
  const auto* dc = std::get_if<DatasetClient>(&problem.clients.at(client));
  if (dc == nullptr) return batch_grad(problem, client, x, {}, rng);
  const std::size_t n = dc->data.size();
  if (n == 0) throw Error("empty client dataset");
  const std::size_t b = std::min<std::size_t>(batch_size, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first b slots are a uniform sample.
  for (std::size_t j = 0; j < b; ++j) {
    std::swap(idx[j], idx[j + rng.index(n - j)]);
  }
  idx.resize(b);
  return softmax_grad(*dc, x, idx);
}

FederatedProblem make_quadratic_problem(const QuadraticSpec& spec,
                                        std::uint64_t seed) {
  if (spec.clients < 1 || spec.dim < 1) {
    throw Error("quadratic problem needs clients >= 1 and dim >= 1");
  }
  if (spec.eig_min < 0.0 || spec.eig_max < spec.eig_min) {
    throw Error("quadratic problem needs 0 <= eig_min <= eig_max");
  }
  const int d = spec.dim;
  auto random_psd = [&](Rng& rng) {
    Matrix g(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) g(r, c) = rng.normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    ParamVector lambda(d);
    for (int k = 0; k < d; ++k) {
      lambda[k] = spec.eig_min + (spec.eig_max - spec.eig_min) * rng.uniform();
    }
    // Pin the spectrum ends so L and the strong-convexity constant are exact.
    lambda[0] = spec.eig_max;
    if (d > 1) lambda[d - 1] = spec.eig_min;
    Matrix a = q * lambda.asDiagonal() * q.transpose();
    return Matrix(0.5 * (a + a.transpose()));
  };

  FederatedProblem problem;
  problem.noise_sigma = spec.noise_sigma;
  Rng shared(derive_stream(seed, 0, 0, Purpose::kProblem));
  const Matrix shared_a = random_psd(shared);
  for (int i = 0; i < spec.clients; ++i) {
    Rng rng(derive_stream(seed, 1, static_cast<std::uint64_t>(i),
                          Purpose::kProblem));
    QuadraticClient q;
    q.A = spec.shared_curvature ? shared_a : random_psd(rng);
    q.c = rng.normal_vector(d, spec.heterogeneity);
    problem.clients.emplace_back(std::move(q));
  }
  problem.weights.assign(spec.clients, 1.0 / spec.clients);
  return problem;
}

FederatedProblem make_glm_problem(int clients, int dim, double alpha,
                                  double beta, int n_per_client,
                                  std::uint64_t seed, int classes) {
  if (clients < 1 || dim < 1 || n_per_client < 1 || classes < 2) {
    throw Error("glm problem needs clients, dim, n >= 1 and classes >= 2");
  }
  if (alpha < 0.0 || beta < 0.0) throw Error("glm alpha/beta must be >= 0");
  FederatedProblem problem;
  ParamVector sigma_diag(dim);
  for (int k = 0; k < dim; ++k) sigma_diag[k] = std::pow(k + 1.0, -1.2);
  const ParamVector sigma_sqrt = sigma_diag.cwiseSqrt();

  for (int i = 0; i < clients; ++i) {
    Rng rng(derive_stream(seed, 0, static_cast<std::uint64_t>(i),
                          Purpose::kProblem));
    GlmClientParams gp;
    gp.model_mean = alpha > 0.0 ? rng.normal(0.0, alpha) : 0.0;
    gp.W.resize(classes, dim);
    for (int r = 0; r < classes; ++r)
      for (int c = 0; c < dim; ++c) gp.W(r, c) = rng.normal(gp.model_mean, 1.0);
    gp.b = ParamVector(classes);
    for (int r = 0; r < classes; ++r) gp.b[r] = rng.normal(gp.model_mean, 1.0);
    gp.feature_shift = beta > 0.0 ? rng.normal(0.0, beta) : 0.0;
    gp.mu = ParamVector(dim);
    for (int k = 0; k < dim; ++k) gp.mu[k] = rng.normal(gp.feature_shift, 1.0);
    gp.sigma_diag = sigma_diag;

    DatasetClient dc;
    dc.classes = classes;
    dc.feature_dim = dim;
    dc.data.examples.reserve(n_per_client);
    for (int s = 0; s < n_per_client; ++s) {
      Example ex;
      ex.features = gp.mu + sigma_sqrt.cwiseProduct(rng.normal_vector(dim));
      Eigen::Index label = 0;
      (gp.W * ex.features + gp.b).maxCoeff(&label);
      ex.label = static_cast<int>(label);
      dc.data.examples.push_back(std::move(ex));
    }
    problem.clients.emplace_back(std::move(dc));
    problem.glm.push_back(std::move(gp));
  }
  problem.weights.assign(clients, 1.0 / clients);
  return problem;
}

FederatedProblem problem_from_partition(
    const std::vector<LabeledDataset>& partition, int classes,
    int feature_dim) {
  if (partition.empty()) throw Error("partition has no clients");
  FederatedProblem problem;
  double total = 0.0;
  for (const auto& part : partition) {
    for (const auto& ex : part.examples) {
      if (ex.features.size() != feature_dim) {
        throw Error("partition feature dimension mismatch");
      }
      if (ex.label < 0 || ex.label >= classes) {
        throw Error("partition label out of range");
      }
    }
    DatasetClient dc;
    dc.data = part;
    dc.classes = classes;
    dc.feature_dim = feature_dim;
    problem.clients.emplace_back(std::move(dc));
    total += static_cast<double>(part.size());
  }
  if (total <= 0.0) throw Error("partition has no examples");
  for (const auto& part : partition) {
    problem.weights.push_back(static_cast<double>(part.size()) / total);
  }
  return problem;
}

int num_labels(const LabeledDataset& dataset) {
  int labels = 0;
  for (const auto& ex : dataset.examples) labels = std::max(labels, ex.label + 1);
  return labels;
}

std::vector<std::int64_t> label_histogram(const LabeledDataset& dataset,
                                          int labels) {
  std::vector<std::int64_t> h(labels, 0);
  for (const auto& ex : dataset.examples) h.at(ex.label)++;
  return h;
}

std::vector<LabeledDataset> dirichlet_partition(
    const LabeledDataset& dataset, int clients, double alpha,
    std::uint64_t seed, std::vector<std::vector<double>>* proportions) {
  if (dataset.empty()) throw Error("dirichlet_partition: empty dataset");
  if (clients < 1) throw Error("dirichlet_partition: clients must be >= 1");
  if (!(alpha > 0.0)) throw Error("dirichlet_partition: alpha must be > 0");
  const int labels = num_labels(dataset);
  Rng rng(derive_stream(seed, 0, 0, Purpose::kPartition));

  // Per-label pools, shuffled once so popping from the back is a uniform
  // draw without replacement.
  std::vector<std::vector<std::size_t>> pools(labels);
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    pools[dataset.examples[j].label].push_back(j);
  }
  for (auto& pool : pools) std::shuffle(pool.begin(), pool.end(), rng.engine());

  // q_i kept in log space; tiny alpha underflows otherwise.
  std::vector<std::vector<double>> log_q(clients, std::vector<double>(labels));
  for (int i = 0; i < clients; ++i) {
    for (int l = 0; l < labels; ++l) log_q[i][l] = log_gamma_draw(alpha, rng);
  }
  if (proportions != nullptr) {
    proportions->assign(clients, std::vector<double>(labels));
    for (int i = 0; i < clients; ++i) {
      const double m = *std::max_element(log_q[i].begin(), log_q[i].end());
      double s = 0.0;
      for (int l = 0; l < labels; ++l) s += std::exp(log_q[i][l] - m);
      for (int l = 0; l < labels; ++l) {
        (*proportions)[i][l] = std::exp(log_q[i][l] - m) / s;
      }
    }
  }

  std::vector<LabeledDataset> out(clients);
  std::size_t remaining = dataset.size();
  std::vector<double> w(labels);
  while (remaining > 0) {
    for (int i = 0; i < clients && remaining > 0; ++i) {
      // Renormalize q_i over labels whose pools are nonempty.
      double m = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < labels; ++l) {
        if (!pools[l].empty()) m = std::max(m, log_q[i][l]);
      }
      double total = 0.0;
      for (int l = 0; l < labels; ++l) {
        w[l] = pools[l].empty() ? 0.0 : std::exp(log_q[i][l] - m);
        total += w[l];
      }
      double u = rng.uniform() * total;
      int pick = -1;
      for (int l = 0; l < labels; ++l) {
        if (w[l] <= 0.0) continue;
        pick = l;
        if (u < w[l]) break;
        u -= w[l];
      }
      out[i].examples.push_back(dataset.examples[pools[pick].back()]);
      pools[pick].pop_back();
      --remaining;
    }
  }
  return out;
}

std::vector<LabeledDataset> shuffle_mix(
    const std::vector<LabeledDataset>& partition, double s,
    std::uint64_t seed) {
  if (!(s >= 0.0 && s <= 1.0)) throw Error("shuffle_mix: s must be in [0, 1]");
  Rng rng(derive_stream(seed, 0, 0, Purpose::kPartition));
  std::vector<LabeledDataset> out(partition.size());
  std::vector<Example> pool;
  std::vector<std::size_t> surrendered(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const auto& ex = partition[i].examples;
    const std::size_t n = ex.size();
    const auto give = static_cast<std::size_t>(std::floor(s * static_cast<double>(n)));
    surrendered[i] = give;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t j = 0; j < give; ++j) {
      std::swap(idx[j], idx[j + rng.index(n - j)]);
    }
    std::vector<char> gone(n, 0);
    for (std::size_t j = 0; j < give; ++j) {
      gone[idx[j]] = 1;
      pool.push_back(ex[idx[j]]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!gone[j]) out[i].examples.push_back(ex[j]);
    }
  }
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  std::size_t next = 0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (std::size_t j = 0; j < surrendered[i]; ++j) {
      out[i].examples.push_back(std::move(pool[next++]));
    }
  }
  return out;
}

void write_dataset(std::ostream& out, const LabeledDataset& dataset) {
  const Eigen::Index f = dataset.empty() ? 0 : dataset.examples[0].features.size();
  out << "label";
  for (Eigen::Index k = 0; k < f; ++k) out << ",f" << k;
  out << '\n';
  for (const auto& ex : dataset.examples) {
    out << ex.label;
    for (Eigen::Index k = 0; k < ex.features.size(); ++k) {
      out << ',' << format_double(ex.features[k]);
    }
    out << '\n';
  }
}

LabeledDataset read_dataset(std::istream& in) {
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index f = -1;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (header) {
      header = false;
      if (cells.empty() || cells[0] != "label") {
        throw Error("dataset file must start with a 'label,...' header");
      }
      f = static_cast<Eigen::Index>(cells.size()) - 1;
      continue;
    }
    if (static_cast<Eigen::Index>(cells.size()) != f + 1) {
      throw Error("parse error on line " + std::to_string(line_no) +
                  ": wrong column count");
    }
    Example ex;
    ex.label = parse_int(cells[0], line_no);
    ex.features.resize(f);
    for (Eigen::Index k = 0; k < f; ++k) {
      ex.features[k] = parse_double(cells[k + 1], line_no);
    }
    ds.examples.push_back(std::move(ex));
  }
  if (header) throw Error("dataset file is empty");
  return ds;
}

void write_partition(std::ostream& out,
                     const std::vector<LabeledDataset>& partition) {
  Eigen::Index f = 0;
  for (const auto& part : partition) {
    if (!part.empty()) {
      f = part.examples[0].features.size();
      break;
    }
  }
  out << "# clients=" << partition.size() << " features=" << f << '\n';
  out << "client_id,label";
  for (Eigen::Index k = 0; k < f; ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (const auto& ex : partition[i].examples) {
      out << i << ',' << ex.label;
      for (Eigen::Index k = 0; k < ex.features.size(); ++k) {
        out << ',' << format_double(ex.features[k]);
      }
      out << '\n';
    }
  }
}

std::vector<LabeledDataset> read_partition(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  long clients = -1;
  long features = -1;
  bool header = true;
  std::vector<LabeledDataset> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("clients=", 0) == 0) clients = std::stol(tok.substr(8));
        if (tok.rfind("features=", 0) == 0) features = std::stol(tok.substr(9));
      }
      continue;
    }
    const auto cells = split_csv(line);
    if (header) {
      header = false;
      if (cells.size() < 2 || cells[0] != "client_id" || cells[1] != "label") {
        throw Error("partition file must have a 'client_id,label,...' header");
      }
      if (features >= 0 && static_cast<long>(cells.size()) - 2 != features) {
        throw Error("partition header disagrees with features= metadata");
      }
      features = static_cast<long>(cells.size()) - 2;
      if (clients >= 0) out.resize(clients);
      continue;
    }
    if (static_cast<long>(cells.size()) != features + 2) {
      throw Error("parse error on line " + std::to_string(line_no) +
                  ": wrong column count");
    }
    const int id = parse_int(cells[0], line_no);
    if (clients >= 0 && id >= clients) {
      throw Error("parse error on line " + std::to_string(line_no) +
                  ": client id out of range");
    }
    if (static_cast<std::size_t>(id) >= out.size()) out.resize(id + 1);
    Example ex;
    ex.label = parse_int(cells[1], line_no);
    ex.features.resize(features);
    for (long k = 0; k < features; ++k) {
      ex.features[k] = parse_double(cells[k + 2], line_no);
    }
    out[id].examples.push_back(std::move(ex));
  }
  if (header) throw Error("partition file is empty");
  return out;
}

}  // namespace fedsim
