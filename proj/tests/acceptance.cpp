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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsim/aggregate.hpp"
#include "fedsim/analysis.hpp"
#include "fedsim/cli.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/local.hpp"
#include "fedsim/sampling.hpp"
#include "fedsim/server.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace fedsim;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [" << what << "]";
    }
  }
};

ExperimentConfig quadratic_cfg(double lr, int steps) {
  ExperimentConfig cfg;
  cfg.problem.kind = ProblemKind::kQuadratic;
  cfg.local.lr = lr;
  cfg.local.duration = steps;
  cfg.threads = 1;
  cfg.eval_every = 1 << 30;
  return cfg;
}

// 1. One local step, full participation: matches gradient descent on F.
void sync_sgd(Check& c) {
  auto cfg = quadratic_cfg(0.1, 1);
  cfg.problem.quadratic = {4, 10, 0.5, 2.0, false, 1.0, 0.0};
  cfg.aggregation.weighting = Weighting::kUniform;
  const auto p = build_problem(cfg.problem, 17);
  Rng rng(3);
  const ParamVector x0 = rng.normal_vector(10);
  Experiment e(p, cfg, x0);
  ParamVector x = x0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    e.run_round();
    x -= 0.1 * global_grad(p, x);
    worst = std::max(worst, (e.model() - x).cwiseAbs().maxCoeff());
  }
  c.detail << "max |x - x_gd| = " << worst;
  c.expect(worst <= 1e-12, "trajectory mismatch");
}

// 2. Unequal local steps: plain averaging is pulled toward the client that
// runs longer; step-normalized averaging removes the pull.
void inconsistency(Check& c) {
  FederatedProblem p;
  p.clients.emplace_back(QuadraticClient{Matrix::Identity(1, 1), ParamVector::Constant(1, 1.0)});
  p.clients.emplace_back(QuadraticClient{Matrix::Identity(1, 1), ParamVector::Constant(1, -1.0)});
  p.weights = {0.5, 0.5};
  const double eta = 0.01;
  const int taus[2] = {2, 4};

  auto run = [&](Normalization norm) {
    AggregationSpec agg;
    agg.weighting = Weighting::kUniform;
    agg.normalization = norm;
    ParamVector x = ParamVector::Zero(1);
    Rng rng(1);
    for (int t = 0; t < 20000; ++t) {
      std::vector<ClientUpdate> ups;
      for (int i = 0; i < 2; ++i) {
        LocalConfig lc;
        lc.lr = eta;
        lc.duration = taus[i];
        LocalContext ctx;
        ctx.round = t;
        ctx.client_id = i;
        ups.push_back(local_train(p, i, x, lc, {}, ctx, rng).update);
      }
      const auto a = aggregate(ups, agg, rng);
      x = server_step(ServerOptimizer{}, x, a.delta, 1.0, init_server_state(ServerOptimizer{}, 1), t).x;
    }
    return x[0];
  };
  const double fedavg = run(Normalization::kNone);
  const double fednova = run(Normalization::kFedNova);

  // Closed-form fixed points: a_i = 1 - (1 - η)^τ_i.
  const double a1 = 1.0 - std::pow(1.0 - eta, taus[0]);
  const double a2 = 1.0 - std::pow(1.0 - eta, taus[1]);
  const double avg_fp = (a1 * 1.0 + a2 * -1.0) / (a1 + a2);
  const double nova_fp = (a1 / taus[0] - a2 / taus[1]) / (a1 / taus[0] + a2 / taus[1]);
  c.detail << "fedavg " << fedavg << " (fixed point " << avg_fp << "), fednova " << fednova
           << " (fixed point " << nova_fp << ")";
  c.expect(std::abs(fedavg + 1.0 / 3.0) <= 0.02, "fedavg not near -1/3");
  c.expect(std::abs(fednova) <= 0.02, "fednova not near 0");
  c.expect(std::abs(fedavg - avg_fp) <= 1e-9, "fedavg off its fixed point");
  c.expect(std::abs(fednova - nova_fp) <= 1e-9, "fednova off its fixed point");
}

// 3. Control variates remove the heterogeneity bias.
void scaffold(Check& c) {
  auto cfg = quadratic_cfg(0.05, 10);
  cfg.problem.quadratic = {4, 10, 0.5, 2.0, false, 1.0, 0.0};
  const auto p = build_problem(cfg.problem, 5);
  const ParamVector xs = global_optimum(p);
  const std::vector<ParamVector> probe{xs};
  const double zeta = estimate_zeta(p, probe);

  auto sc = cfg;
  sc.local.scaffold = true;
  Experiment a(p, sc);
  Experiment b(p, cfg);
  int hit = -1;
  for (int t = 0; t < 2000; ++t) {
    a.run_round();
    b.run_round();
    if (hit < 0 && (a.model() - xs).norm() <= 1e-6) hit = t + 1;
  }
  const double gap_avg = (b.model() - xs).norm();

  // FedAvg fixed point: (Σ (I - P_i))^{-1} Σ (I - P_i) c_i, P_i = (I - ηA_i)^τ.
  const Eigen::Index d = p.dim();
  Matrix lhs = Matrix::Zero(d, d);
  ParamVector rhs = ParamVector::Zero(d);
  for (const auto& obj : p.clients) {
    const auto& q = std::get<QuadraticClient>(obj);
    Matrix step = Matrix::Identity(d, d) - 0.05 * q.A;
    Matrix pw = Matrix::Identity(d, d);
    for (int k = 0; k < 10; ++k) pw = pw * step;
    lhs += Matrix::Identity(d, d) - pw;
    rhs += (Matrix::Identity(d, d) - pw) * q.c;
  }
  const ParamVector fp = lhs.lu().solve(rhs);
  c.detail << "zeta(x*) " << zeta << ", scaffold hit 1e-6 at round " << hit << ", fedavg gap "
           << gap_avg << " (closed form " << (fp - xs).norm() << ")";
  c.expect(zeta >= 1.0, "heterogeneity below 1");
  c.expect(hit > 0, "scaffold did not reach 1e-6");
  c.expect(gap_avg >= 1e-2, "fedavg did not stall");
  c.expect((b.model() - fp).norm() <= 1e-6, "fedavg not at its closed-form fixed point");
}

// Equal-curvature quadratic with known constants for the bound checks.
struct BoundSetup {
  FederatedProblem problem;
  TheoryConstants k;
  double f_star = 0.0;
};

BoundSetup bound_setup(double sigma) {
  QuadraticSpec qs{4, 10, 0.5, 2.0, true, 0.5, sigma};
  BoundSetup s;
  s.problem = make_quadratic_problem(qs, 21);
  const ParamVector xs = global_optimum(s.problem);
  s.f_star = global_value(s.problem, xs);
  // With one A the gradient gap A(c̄ - c_i) does not depend on x.
  const auto& a0 = std::get<QuadraticClient>(s.problem.clients[0]).A;
  ParamVector cbar = ParamVector::Zero(10);
  for (const auto& obj : s.problem.clients) cbar += 0.25 * std::get<QuadraticClient>(obj).c;
  double zeta = 0.0;
  for (const auto& obj : s.problem.clients) {
    zeta = std::max(zeta, (a0 * (cbar - std::get<QuadraticClient>(obj).c)).norm());
  }
  s.k.L = Eigen::SelfAdjointEigenSolver<Matrix>(a0).eigenvalues().maxCoeff();
  s.k.sigma = sigma;
  s.k.zeta = zeta;
  s.k.D = xs.norm();  // x0 = 0
  s.k.M = 4;
  return s;
}

struct McStats {
  double excess = 0.0;       // seed mean of the time-averaged F(x̄) - F*
  double drift = 0.0;        // max over (t, k, i) of the seed-mean drift
};

McStats shadow_mc(const FederatedProblem& p, double f_star, double eta, int tau, int T, int seeds,
                  std::uint64_t master) {
  McStats out;
  std::vector<double> drift_sum;
  auto cfg = quadratic_cfg(eta, tau);
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = derive_stream(master, s, 0, Purpose::kReplica);
    Experiment e(p, cfg);
    const auto pts = shadow_sequence(e, T);
    double mean = 0.0;
    if (drift_sum.empty()) drift_sum.assign(pts.size() * p.clients.size(), 0.0);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      mean += pts[j].value - f_star;
      for (std::size_t i = 0; i < pts[j].drift_sq.size(); ++i) {
        drift_sum[j * p.clients.size() + i] += pts[j].drift_sq[i];
      }
    }
    out.excess += mean / static_cast<double>(pts.size()) / seeds;
  }
  for (double v : drift_sum) out.drift = std::max(out.drift, v / seeds);
  return out;
}

// 4. Client drift bound.
void drift_bound(Check& c) {
  const auto s = bound_setup(1.0);
  for (int tau : {4, 16}) {
    auto k = s.k;
    k.tau = tau;
    k.T = 50;
    const double tuned = tuned_eta(k);
    for (double eta : {tuned, tuned / 2}) {
      const auto mc = shadow_mc(s.problem, s.f_star, eta, tau, 50, 50, 7);
      const double bound = lemma2_bound(eta, tau, s.k.zeta, s.k.sigma);
      c.detail << " tau=" << tau << " eta=" << eta << ": " << mc.drift << " <= " << bound << ";";
      c.expect(mc.drift <= bound, "drift above bound");
    }
  }
}

// Same global objective and the same per-client curvature for every `zeta`;
// only the client gradients at x* change, each with norm `zeta`.
FederatedProblem activation_problem(double zeta, double sigma) {
  const int d = 10, m = 4;
  ParamVector abar(d), xs(d);
  for (int j = 0; j < d; ++j) {
    abar[j] = 0.5 + 1.5 * j / (d - 1.0);
    xs[j] = std::cos(1.0 + j);
  }
  const double sgn[4] = {1.0, -1.0, 1.0, -1.0};
  FederatedProblem p;
  p.noise_sigma = sigma;
  for (int i = 0; i < m; ++i) {
    ParamVector a(d), v(d);
    for (int j = 0; j < d; ++j) {
      const double flip = (j % 2 == 0) ? 1.0 : -1.0;
      a[j] = abar[j] * (1.0 + 0.5 * sgn[i] * flip);
      // Σ_i v_i = 0 keeps x* fixed; ‖v_i‖ = 1 for every i.
      // Offsets follow the curvature groups; opposite offsets on equal
      // curvature would cancel exactly in the average iterate.
      v[j] = sgn[i] * (j < 5 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(d));
    }
    v *= zeta;
    // ∇F_i(x*) = A_i (x* - c_i) = -v_i.
    const ParamVector ci = xs + (v.array() / a.array()).matrix();
    p.clients.emplace_back(QuadraticClient{Matrix(a.asDiagonal()), ci});
    p.weights.push_back(1.0 / m);
  }
  return p;
}

// 5. Convergence bound, and activation of the heterogeneity term.
void theorem_bound(Check& c) {
  const auto s = bound_setup(1.0);
  int checked = 0;
  double worst_ratio = 0.0;
  for (int T : {50, 200}) {
    for (int tau : {1, 4, 16}) {
      auto k = s.k;
      k.tau = tau;
      k.T = T;
      const double tuned = tuned_eta(k);
      for (double eta : {tuned, tuned / 2}) {
        k.eta = eta;
        const auto mc = shadow_mc(s.problem, s.f_star, eta, tau, T, 50, 11);
        const double rhs = theorem1_rhs(k);
        worst_ratio = std::max(worst_ratio, mc.excess / rhs);
        c.expect(mc.excess <= rhs, "T=" + std::to_string(T) + " tau=" + std::to_string(tau));
        ++checked;
      }
    }
  }
  c.detail << checked << " grid points, max measured/bound " << worst_ratio << ";";

  const auto zero = activation_problem(0.0, 1.0);
  const auto one = activation_problem(1.0, 1.0);
  const ParamVector xs = global_optimum(zero);
  c.expect((global_optimum(one) - xs).norm() <= 1e-12, "activation problems differ in x*");
  const std::vector<ParamVector> probe{xs};
  const double z0 = estimate_zeta(zero, probe);
  const double z1 = estimate_zeta(one, probe);
  const double eta = 0.05;  // below 1/(4 max_i L_i) = 1/12
  const auto e0 = shadow_mc(zero, global_value(zero, xs), eta, 16, 50, 50, 13);
  const auto e1 = shadow_mc(one, global_value(one, xs), eta, 16, 50, 50, 13);
  c.detail << " zeta " << z0 << " -> excess " << e0.excess << ", zeta " << z1 << " -> excess "
           << e1.excess;
  c.expect(z0 <= 1e-12 && std::abs(z1 - 1.0) <= 1e-12, "zeta construction");
  c.expect(e1.excess > e0.excess, "no heterogeneity penalty");
}

// 6. Compressors.
void compressors(Check& c) {
  Rng rng(derive_stream(1, 0, 0, Purpose::kCompression));
  const ParamVector x = (ParamVector(5) << 0.3, -1.2, 0.05, 0.9, -0.4).finished();
  const int draws = 100000;
  ParamVector sum = ParamVector::Zero(5), sq = ParamVector::Zero(5);
  for (int n = 0; n < draws; ++n) {
    const ParamVector q = quantize_unbiased(x, 4, rng).values;
    sum += q;
    sq += q.cwiseProduct(q);
  }
  double worst_z = 0.0;
  for (int j = 0; j < 5; ++j) {
    const double mean = sum[j] / draws;
    const double se = std::sqrt(std::max(sq[j] / draws - mean * mean, 0.0) / draws);
    // An endpoint coordinate never moves; only summation rounding is left.
    if (se == 0.0) {
      c.expect(std::abs(mean - x[j]) <= draws * 2.3e-16 * std::abs(x[j]), "degenerate coordinate");
      continue;
    }
    worst_z = std::max(worst_z, std::abs(mean - x[j]) / se);
  }
  c.detail << "quantizer max |mean - x|/SE " << worst_z;
  c.expect(worst_z <= 4.0, "quantizer biased");

  bool contraction = true, recursion = true;
  for (int n = 0; n < 1000; ++n) {
    const int d = 2 + static_cast<int>(rng.uniform() * 30);
    const int k = 1 + static_cast<int>(rng.uniform() * d);
    const ParamVector y = rng.normal_vector(d);
    const ParamVector zero = ParamVector::Zero(d);
    const auto t = topk_ef(y, k, zero);
    if ((y - t.output).squaredNorm() > (1.0 - static_cast<double>(k) / d) * y.squaredNorm()) {
      contraction = false;
    }
    const ParamVector r = rng.normal_vector(d);
    const auto u = topk_ef(y, k, r);
    const ParamVector in = y + r;
    if (in != ParamVector(u.output + u.residual)) recursion = false;
  }
  c.expect(contraction, "top-k contraction");
  c.expect(recursion, "error-feedback recursion");
}

// 7. Sampling and weighting pairings.
struct Mc {
  double mean, se;
};

Mc pairing(const std::vector<std::int64_t>& n, const std::vector<double>& delta,
           SamplingScheme scheme, Weighting w, bool unbiased, int m, std::uint64_t seed) {
  std::vector<ClientDescriptor> pop;
  double total = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    pop.push_back({static_cast<int>(i), n[i], 0});
    total += static_cast<double>(n[i]);
  }
  AggregationSpec agg;
  agg.weighting = w;
  if (unbiased) agg.expected_weight_sum = static_cast<double>(m) / n.size() * total;
  const int draws = 10000;
  double s = 0.0, s2 = 0.0;
  for (int t = 0; t < draws; ++t) {
    Rng rng(derive_stream(seed, t, 0, Purpose::kSampling));
    std::vector<ClientUpdate> ups;
    for (int id : sample_cohort({scheme, m, 2}, pop, t, rng)) {
      ClientUpdate u;
      u.client_id = id;
      u.delta = ParamVector::Constant(1, delta[id]);
      u.examples_processed = n[id];
      ups.push_back(u);
    }
    const double v = aggregate(ups, agg, rng).delta[0];
    s += v;
    s2 += v * v;
  }
  const double mean = s / draws;
  return {mean, std::sqrt(std::max(s2 / draws - mean * mean, 0.0) / draws)};
}

void sampling(Check& c) {
  const std::vector<std::int64_t> n{3, 8, 1, 6, 12, 2};
  const std::vector<double> d{0.7, -1.1, 2.5, 0.2, -0.3, 1.4};
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    num += n[i] * d[i];
    den += n[i];
  }
  const double want = num / den;
  const auto a = pairing(n, d, SamplingScheme::kWeightedWithReplacement, Weighting::kUniform, false, 3, 31);
  const auto b = pairing(n, d, SamplingScheme::kUniformWithoutReplacement, Weighting::kExampleWeighted,
                         true, 3, 32);
  const auto bad = pairing({1, 9}, {1.0, 0.0}, SamplingScheme::kUniformWithoutReplacement,
                           Weighting::kUniform, false, 1, 33);
  c.detail << "weighted+uniform " << std::abs(a.mean - want) / a.se << " SE, uniform+examples "
           << std::abs(b.mean - want) / b.se << " SE, mismatched " << std::abs(bad.mean - 0.1) / bad.se
           << " SE";
  c.expect(std::abs(a.mean - want) <= 4 * a.se, "weighted sampling pairing");
  c.expect(std::abs(b.mean - want) <= 4 * b.se, "uniform sampling pairing");
  c.expect(std::abs(bad.mean - 0.1) > 10 * bad.se, "mismatched pairing not detected");
}

// 8. Cost model.
void cost(Check& c) {
  const CostModelParams p;
  c.expect(p.b_down == 0.75 && p.b_up == 0.25 && p.r_comp == 7.0 && p.c_comp == 10.0, "defaults");
  const std::vector<double> one{1.0};
  const double t = round_time(0.75, 0.25, one, 0.1, p);
  c.detail << "round_time " << t;
  c.expect(std::abs(t - 19.1) <= 1e-9, "19.1 s example");
  const std::vector<double> none{0.0};
  c.expect(round_time(0.0, 0.0, none, 0.0, p) == 10.0, "compute floor");
  c.expect(message_sizes(Algorithm::kFedAvg).total() == 2, "fedavg 2d");
  c.expect(message_sizes(Algorithm::kFedAdam).total() == 2, "fedadam 2d");
  c.expect(message_sizes(Algorithm::kFedYogi).total() == 2, "fedyogi 2d");
  c.expect(message_sizes(Algorithm::kFedPa).total() == 2, "fedpa 2d");
  c.expect(message_sizes(Algorithm::kScaffold).total() == 4, "scaffold 4d");
  c.expect(message_sizes(Algorithm::kMime).total() == 4, "mime 4d");
  c.expect(message_sizes(Algorithm::kMimeLite).total() == 3, "mimelite 3d");
}

// 9. Clipping and zero noise.
void dp(Check& c) {
  Rng rng(9);
  bool below = true, above = true;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const ParamVector x = rng.normal_vector(8) * (0.1 + 3.0 * rng.uniform());
    const double clip = 0.5 + rng.uniform() * 4.0;
    const ParamVector y = clip_l2(x, clip);
    if (x.norm() <= clip) {
      if (y != x) below = false;
    } else {
      worst = std::max(worst, std::abs(y.norm() - clip));
      if (std::abs(y.norm() - clip) > 1e-12) above = false;
    }
  }
  c.detail << "max |norm - C| " << worst;
  c.expect(below, "small updates changed");
  c.expect(above, "large updates not at norm C");

  AggregationSpec agg;
  agg.weighting = Weighting::kUniform;
  agg.dp = DpSpec{1.0, 0.0};
  std::vector<ClientUpdate> ups;
  std::vector<ParamVector> clipped;
  for (int i = 0; i < 5; ++i) {
    ClientUpdate u;
    u.client_id = i;
    u.delta = rng.normal_vector(6);
    clipped.push_back(clip_l2(u.delta, 1.0));
    ups.push_back(u);
  }
  Rng a(1), noise(2);
  const ParamVector got = aggregate(ups, agg, a, nullptr, &noise).delta;
  c.expect(got == weighted_mean(clipped, std::vector<double>(5, 1.0)), "z = 0 added noise");
}

// 10. Byte-identical CSVs across reruns and worker counts.
void reproducibility(Check& c) {
  const auto dir = fedsim_test::scratch_dir("acceptance_repro");
  fedsim_test::write_file(dir / "r.cfg",
                          "rounds = 25\nseed = 8\neval.every = 4\n"
                          "[problem]\nkind = glm\nclients = 10\ndim = 4\nclasses = 3\nsamples_per_client = 30\n"
                          "[local]\nlr = 0.1\nepochs = 1\nbatch_size = 5\n"
                          "[sampling]\nscheme = uniform\ncohort = 4\n"
                          "[aggregation]\ncompression = quant\nlevels = 8\n"
                          "[split]\nmode = heldout\n");
  std::ostringstream err;
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4", "1", "4"}) {
    setenv("FEDSIM_THREADS", threads, 1);
    const auto csv = dir / ("out_" + std::to_string(outputs.size()) + ".csv");
    if (cmd_run((dir / "r.cfg").string(), csv.string(), "", err) != kExitOk) {
      c.expect(false, "run failed: " + err.str());
      return;
    }
    outputs.push_back(fedsim_test::read_file(csv));
  }
  unsetenv("FEDSIM_THREADS");
  c.detail << outputs[0].size() << " bytes";
  c.expect(outputs[0] == outputs[2], "rerun differs");
  c.expect(outputs[0] == outputs[1] && outputs[1] == outputs[3], "thread count changes output");
}

// 11. Sweep selection against a rescan of the grid CSV.
void sweep(Check& c) {
  const auto dir = fedsim_test::scratch_dir("acceptance_sweep");
  fedsim_test::write_file(dir / "s.cfg",
                          "rounds = 15\n[problem]\nkind = quadratic\nclients = 6\nnoise_sigma = 0.5\n"
                          "shared_curvature = false\n[local]\nlr = 0.05\nsteps = 4\n"
                          "[sampling]\nscheme = uniform\ncohort = 3\n"
                          "[sweep]\neta = 0.01, 0.03, 0.1\neta_s = 0.3, 1, 3\nseeds = 1, 2, 3\n");
  std::ostringstream err;
  if (cmd_sweep((dir / "s.cfg").string(), (dir / "g.csv").string(), (dir / "sel.json").string(),
                err) != kExitOk) {
    c.expect(false, "sweep failed: " + err.str());
    return;
  }
  const auto sel = nlohmann::json::parse(fedsim_test::read_file(dir / "sel.json"));
  const auto top = fedsim_test::rescan_grid(dir / "g.csv", false);
  c.expect(fedsim_test::read_csv(dir / "g.csv").size() == 1 + 27, "grid row count");
  c.expect(top.size() == 2, "rescan");
  if (top.size() < 2) return;
  c.detail << "best (eta " << top[0].eta << ", eta_s " << top[0].eta_s << "), second (eta "
           << top[1].eta << ", eta_s " << top[1].eta_s << ")";
  c.expect(sel["best"]["eta"].get<double>() == top[0].eta &&
               sel["best"]["eta_s"].get<double>() == top[0].eta_s,
           "best differs");
  c.expect(sel["second_best"]["eta"].get<double>() == top[1].eta &&
               sel["second_best"]["eta_s"].get<double>() == top[1].eta_s,
           "second best differs");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"synchronous SGD equivalence", sync_sgd},
      {"objective inconsistency and step normalization", inconsistency},
      {"control variates remove heterogeneity bias", scaffold},
      {"client drift bound", drift_bound},
      {"convergence bound and heterogeneity activation", theorem_bound},
      {"compressor contracts", compressors},
      {"sampling and weighting unbiasedness", sampling},
      {"cost model", cost},
      {"clipping and zero noise", dp},
      {"reproducibility", reproducibility},
      {"sweep selection", sweep},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (!c.ok) ++failed;
    std::cout << (c.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
              << c.detail.str() << "\n";
    std::cout.flush();
  }
  return failed == 0 ? 0 : 1;
}
