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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "fedsim/aggregate.hpp"

using fedsim::AggregationSpec;
using fedsim::ClientUpdate;
using fedsim::CompressionKind;
using fedsim::Normalization;
using fedsim::ParamVector;
using fedsim::Weighting;

namespace {

ParamVector vec(std::initializer_list<double> xs) {
  ParamVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

ClientUpdate update(int id, ParamVector delta, std::int64_t examples = 1, int steps = 1) {
  ClientUpdate u;
  u.client_id = id;
  u.delta = std::move(delta);
  u.examples_processed = examples;
  u.weight = static_cast<double>(examples);
  u.local_steps = steps;
  return u;
}

AggregationSpec uniform() {
  AggregationSpec s;
  s.weighting = Weighting::kUniform;
  return s;
}

}  // namespace

TEST_CASE("aggregate examples") {
  fedsim::Rng rng(0);
  std::vector<ClientUpdate> ups{update(0, vec({2})), update(1, vec({4}))};
  CHECK(fedsim::aggregate(ups, uniform(), rng).delta[0] == 3.0);

  AggregationSpec nova = uniform();
  nova.normalization = Normalization::kFedNova;
  std::vector<ClientUpdate> nova_ups{update(0, vec({1}), 1, 1), update(1, vec({8}), 1, 4)};
  CHECK(fedsim::aggregate(nova_ups, nova, rng).delta[0] == doctest::Approx(3.75).epsilon(1e-15));
  // Same with example weighting and equal example counts.
  nova.weighting = Weighting::kExampleWeighted;
  CHECK(fedsim::aggregate(nova_ups, nova, rng).delta[0] == doctest::Approx(3.75).epsilon(1e-15));

  AggregationSpec dp = uniform();
  dp.dp = fedsim::DpSpec{1.0, 0.0};
  std::vector<ClientUpdate> big{update(0, vec({3, 4}))};
  const ParamVector out = fedsim::aggregate(big, dp, rng).delta;
  CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("example weighting uses examples processed") {
  fedsim::Rng rng(0);
  AggregationSpec s;
  std::vector<ClientUpdate> ups{update(0, vec({2}), 1), update(1, vec({4}), 3)};
  CHECK(fedsim::aggregate(ups, s, rng).delta[0] == 3.5);
  s.expected_weight_sum = 8.0;  // realized 4: the output halves
  CHECK(fedsim::aggregate(ups, s, rng).delta[0] == doctest::Approx(1.75).epsilon(1e-15));
}

TEST_CASE("aggregate errors") {
  fedsim::Rng rng(0);
  std::vector<ClientUpdate> none;
  CHECK_THROWS_AS(fedsim::aggregate(none, uniform(), rng), fedsim::Error);
  std::vector<ClientUpdate> zero{update(0, vec({1}), 0), update(1, vec({2}), 0)};
  CHECK_THROWS_WITH_AS(fedsim::aggregate(zero, AggregationSpec{}, rng),
                       doctest::Contains("degenerate weights"), fedsim::Error);

  AggregationSpec bad;
  bad.dp = fedsim::DpSpec{1.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), fedsim::Error);  // dp needs uniform weighting
  bad.weighting = Weighting::kUniform;
  bad.compression.kind = CompressionKind::kTopK;
  CHECK_THROWS_AS(bad.validate(), fedsim::Error);  // top-k excluded from dp
  bad.compression.kind = CompressionKind::kUnbiasedQuant;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("fednova reduces to the plain average when steps are equal") {
  fedsim::Rng rng(1);
  std::vector<ClientUpdate> ups;
  for (int i = 0; i < 4; ++i) ups.push_back(update(i, rng.normal_vector(3), 1 + i, 5));
  AggregationSpec plain;
  AggregationSpec nova;
  nova.normalization = Normalization::kFedNova;
  CHECK((fedsim::aggregate(ups, plain, rng).delta - fedsim::aggregate(ups, nova, rng).delta).norm() <=
        1e-14);
}

TEST_CASE("clipping") {
  fedsim::Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const ParamVector x = rng.normal_vector(5, std::exp(2.0 * rng.normal()));
    const double c = std::exp(rng.normal());
    const ParamVector y = fedsim::clip_l2(x, c);
    if (x.norm() <= c) {
      CHECK(y == x);
    } else {
      CHECK(std::abs(y.norm() - c) <= 1e-12);
    }
  }
}

TEST_CASE("dp noise: exactly zero at z = 0, std z*C/m otherwise") {
  fedsim::Rng rng(3);
  std::vector<ClientUpdate> ups{update(0, vec({0.1, 0.2})), update(1, vec({0.3, -0.4}))};
  AggregationSpec dp = uniform();
  dp.dp = fedsim::DpSpec{10.0, 0.0};
  CHECK(fedsim::aggregate(ups, dp, rng).delta == fedsim::aggregate(ups, uniform(), rng).delta);

  dp.dp = fedsim::DpSpec{2.0, 1.5};  // std 1.5
  const ParamVector mean = fedsim::aggregate(ups, uniform(), rng).delta;
  const int n = 20000;
  double sq = 0.0;
  for (int k = 0; k < n; ++k) sq += (fedsim::aggregate(ups, dp, rng).delta - mean).squaredNorm();
  CHECK(sq / (2.0 * n) == doctest::Approx(1.5 * 1.5).epsilon(0.03));
}

TEST_CASE("quantizer examples") {
  fedsim::Rng rng(4);
  const ParamVector on_grid = vec({-2, 0, 2, 2, -2});
  CHECK(fedsim::quantize_unbiased(on_grid, 3, rng).values == on_grid);
  CHECK(fedsim::quantize_unbiased(ParamVector::Zero(4), 5, rng).values.isZero(0.0));

  const int n = 100000;
  int ones = 0;
  for (int k = 0; k < n; ++k) {
    const double v = fedsim::quantize_to_grid(vec({0.3}), 0.0, 1.0, 2, rng)[0];
    CHECK((v == 0.0 || v == 1.0));
    ones += v == 1.0 ? 1 : 0;
  }
  const double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(static_cast<double>(ones) / n - 0.3) <= 4.0 * se);
}

TEST_CASE("quantizer payload bits") {
  fedsim::Rng rng(5);
  CHECK(fedsim::quantize_unbiased(ParamVector::Ones(10), 2, rng).bits == 10 * 1 + 64);
  CHECK(fedsim::quantize_unbiased(ParamVector::Ones(10), 5, rng).bits == 10 * 3 + 64);
  CHECK(fedsim::quantize_unbiased(ParamVector::Ones(10), 16, rng).bits == 10 * 4 + 64);
  std::vector<ClientUpdate> ups{update(0, ParamVector::Ones(10))};
  AggregationSpec s = uniform();
  CHECK(fedsim::aggregate(ups, s, rng).payload_bytes[0] == 80);
  s.compression.kind = CompressionKind::kUnbiasedQuant;
  s.compression.levels = 4;
  CHECK(fedsim::aggregate(ups, s, rng).payload_bytes[0] == (10 * 2 + 64 + 7) / 8);
}

TEST_CASE("quantizer is unbiased with variance at most omega*|x|^2") {
  fedsim::Rng rng(6);
  const int d = 6;
  const ParamVector x = rng.normal_vector(d);
  const int n = 100000;
  for (int levels : {2, 5}) {
    ParamVector sum = ParamVector::Zero(d), sum_sq = ParamVector::Zero(d);
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
      const ParamVector q = fedsim::quantize_unbiased(x, levels, rng).values;
      sum += q;
      sum_sq += q.cwiseProduct(q);
      err += (q - x).squaredNorm();
    }
    const ParamVector mean = sum / n;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double se = std::sqrt(std::max(sum_sq[j] / n - mean[j] * mean[j], 0.0) / n);
      CHECK(std::abs(mean[j] - x[j]) <= 4.0 * se + 1e-15);
    }
    CHECK(err / n <= fedsim::quantization_omega(d, levels) * x.squaredNorm());
  }
}

TEST_CASE("quantized sums commute with addition in expectation") {
  fedsim::Rng rng(7);
  std::vector<ParamVector> xs;
  ParamVector total = ParamVector::Zero(4);
  for (int i = 0; i < 5; ++i) {
    xs.push_back(rng.normal_vector(4));
    total += xs.back();
  }
  const int n = 40000;
  ParamVector sum = ParamVector::Zero(4), sum_sq = ParamVector::Zero(4);
  for (int k = 0; k < n; ++k) {
    ParamVector s = ParamVector::Zero(4);
    for (const auto& x : xs) s += fedsim::quantize_unbiased(x, 3, rng).values;
    sum += s;
    sum_sq += s.cwiseProduct(s);
  }
  const ParamVector mean = sum / n;
  for (Eigen::Index j = 0; j < 4; ++j) {
    const double se = std::sqrt((sum_sq[j] / n - mean[j] * mean[j]) / n);
    CHECK(std::abs(mean[j] - total[j]) <= 4.0 * se);
  }
}

TEST_CASE("top-k examples") {
  const auto r = fedsim::topk_ef(vec({3, -1, 2}), 1, ParamVector::Zero(3));
  CHECK(r.output == vec({3, 0, 0}));
  CHECK(r.residual == vec({0, -1, 2}));

  const ParamVector x = vec({0.5, -7, 2});
  const ParamVector res = vec({1, 1, -1});
  const auto full = fedsim::topk_ef(x, 3, res);
  CHECK(full.output == x + res);
  CHECK(full.residual.isZero(0.0));

  // Ties go to the lower index.
  CHECK(fedsim::topk_ef(vec({1, -2, 2, 1}), 1, ParamVector::Zero(4)).output == vec({0, -2, 0, 0}));
  CHECK(fedsim::topk_ef(vec({1, -2, 2, 1}), 3, ParamVector::Zero(4)).output == vec({1, -2, 2, 0}));

  CHECK_THROWS_AS(fedsim::topk_ef(x, 0, res), fedsim::Error);
  CHECK_THROWS_AS(fedsim::topk_ef(x, 4, res), fedsim::Error);
}

TEST_CASE("top-k contraction and exact error-feedback recursion") {
  fedsim::Rng rng(8);
  const int d = 12;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng.index(d));
    const ParamVector x = rng.normal_vector(d);
    const ParamVector res = rng.normal_vector(d, 0.5);
    const ParamVector y = x + res;
    const auto r = fedsim::topk_ef(x, k, res);
    CHECK((y - r.output).squaredNorm() <= (1.0 - static_cast<double>(k) / d) * y.squaredNorm() + 1e-15);
    CHECK((r.output + r.residual) == y);
  }
}

TEST_CASE("aggregate threads error-feedback residuals per client") {
  fedsim::Rng rng(9);
  AggregationSpec s = uniform();
  s.compression.kind = CompressionKind::kTopK;
  s.compression.k = 1;
  s.compression.error_feedback = true;
  fedsim::ResidualStore store;
  std::vector<ClientUpdate> ups{update(3, vec({3, -1, 2}))};
  CHECK(fedsim::aggregate(ups, s, rng, &store).delta == vec({3, 0, 0}));
  CHECK(store.at(3) == vec({0, -1, 2}));
  ups[0].delta = vec({0, 0, 0.5});
  CHECK(fedsim::aggregate(ups, s, rng, &store).delta == vec({0, 0, 2.5}));
  CHECK(store.at(3) == vec({0, -1, 0}));
  CHECK(fedsim::aggregate(ups, s, rng, &store).payload_bytes[0] == 12);
  CHECK_THROWS_AS(fedsim::aggregate(ups, s, rng), fedsim::Error);
}
