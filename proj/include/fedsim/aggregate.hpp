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

// Cohort aggregation: per-update compress -> clip -> weight/normalize, then
// optional Gaussian noise on the mean.
//
// Unbiased quantization commutes with summation in expectation, so it is
// compatible with secure-sum style aggregation. Top-k is not: the support of
// Σ C(x_i) differs from C(Σ x_i). Top-k is therefore rejected together with
// differential privacy.

#ifndef FEDSIM_AGGREGATE_HPP_
#define FEDSIM_AGGREGATE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fedsim/core.hpp"

namespace fedsim {

enum class Weighting { kExampleWeighted, kUniform };
enum class Normalization { kNone, kFedNova };
enum class CompressionKind { kNone, kUnbiasedQuant, kTopK };

struct DpSpec {
  double clip = 1.0;     // C
  double noise_z = 0.0;  // noise multiplier z
};

struct CompressionSpec {
  CompressionKind kind = CompressionKind::kNone;
  int levels = 2;
  int k = 1;
  bool error_feedback = false;
};

struct AggregationSpec {
  Weighting weighting = Weighting::kExampleWeighted;
  Normalization normalization = Normalization::kNone;
  std::optional<DpSpec> dp;
  CompressionSpec compression;
  // When set, weights are divided by this value (the expected cohort weight
  // sum) instead of the realized cohort sum. This makes example-weighted
  // aggregation under uniform sampling without replacement unbiased.
  std::optional<double> expected_weight_sum;

  void validate() const;
};

// Error-feedback memory, keyed by client id.
using ResidualStore = std::map<int, ParamVector>;

struct CompressedVector {
  ParamVector values;
  std::int64_t bits = 0;
};

// Stochastic rounding of every coordinate onto `levels` evenly spaced points
// spanning [grid_min, grid_max]. Unbiased for inputs inside the grid.
ParamVector quantize_to_grid(const ParamVector& x, double grid_min,
                             double grid_max, int levels, Rng& rng);

// Grid over [-‖x‖∞, ‖x‖∞]; payload is d·⌈log2 levels⌉ bits plus a 64-bit
// scale.
CompressedVector quantize_unbiased(const ParamVector& x, int levels, Rng& rng);

// Variance factor ω with E‖C(x) - x‖² <= ω ‖x‖² for quantize_unbiased.
double quantization_omega(Eigen::Index d, int levels);

struct TopKResult {
  ParamVector output;
  ParamVector residual;
  std::int64_t bits = 0;
};

// y = x + residual; keeps the k largest |y_j| (ties to the lower index) and
// returns the remainder as the new residual.
TopKResult topk_ef(const ParamVector& x, int k, const ParamVector& residual);

// Projection onto the ℓ2 ball of radius C. Vectors inside are returned as is.
ParamVector clip_l2(const ParamVector& x, double clip);

struct AggregateOutput {
  ParamVector delta;
  std::vector<std::int64_t> payload_bytes;  // per update, client -> server
};

// `updates` must be ordered by ascending client id (duplicates allowed for
// with-replacement cohorts). `residuals` is required for top-k with error
// feedback. DP noise draws from `noise_rng` when given, else from `rng`.
AggregateOutput aggregate(std::span<const ClientUpdate> updates,
                          const AggregationSpec& spec, Rng& rng,
                          ResidualStore* residuals = nullptr,
                          Rng* noise_rng = nullptr);

}  // namespace fedsim

#endif  // FEDSIM_AGGREGATE_HPP_
