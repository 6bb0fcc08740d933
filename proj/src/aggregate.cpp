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

#include "fedsim/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedsim {

namespace {

int bits_per_level(int levels) {
  int b = 0;
  while ((1LL << b) < levels) ++b;
  return b;
}

}  // namespace

void AggregationSpec::validate() const {
  if (dp) {
    if (weighting != Weighting::kUniform) {
      throw Error("aggregation: dp requires uniform weighting");
    }
    if (!(dp->clip > 0.0)) throw Error("aggregation: dp clip must be > 0");
    if (dp->noise_z < 0.0) throw Error("aggregation: dp noise must be >= 0");
    if (compression.kind == CompressionKind::kTopK) {
      throw Error("aggregation: top-k does not commute with summation; not allowed with dp");
    }
  }
  if (compression.kind == CompressionKind::kUnbiasedQuant && compression.levels < 2) {
    throw Error("aggregation: quantization levels must be >= 2");
  }
  if (compression.kind == CompressionKind::kTopK && compression.k < 1) {
    throw Error("aggregation: top-k k must be >= 1");
  }
  if (expected_weight_sum && !(*expected_weight_sum > 0.0)) {
    throw Error("aggregation: expected weight sum must be > 0");
  }
}

ParamVector quantize_to_grid(const ParamVector& x, double grid_min,
                             double grid_max, int levels, Rng& rng) {
  if (levels < 2) throw Error("quantize: levels must be >= 2");
  ParamVector out(x.size());
  const double span = grid_max - grid_min;
  if (span <= 0.0) {
    out.setConstant(grid_min);
    return out;
  }
  const double h = span / (levels - 1);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double pos = std::clamp((x[j] - grid_min) / h, 0.0, double(levels - 1));
    double lo = std::floor(pos);
    if (lo >= levels - 1) lo = levels - 2;
    const double p_up = pos - lo;
    // Draw even for on-grid coordinates so the stream position is fixed.
    const double u = rng.uniform();
    const double idx = (u < p_up) ? lo + 1.0 : lo;
    // Exact endpoints keep on-grid inputs unchanged.
    out[j] = idx == double(levels - 1) ? grid_max : grid_min + idx * h;
  }
  return out;
}

CompressedVector quantize_unbiased(const ParamVector& x, int levels, Rng& rng) {
  if (levels < 2) throw Error("quantize: levels must be >= 2");
  CompressedVector out;
  const double s = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (s == 0.0) {
    out.values = ParamVector::Zero(x.size());
  } else {
    out.values = quantize_to_grid(x, -s, s, levels, rng);
  }
  out.bits = static_cast<std::int64_t>(x.size()) * bits_per_level(levels) + 64;
  return out;
}

double quantization_omega(Eigen::Index d, int levels) {
  const double gaps = levels - 1.0;
  return static_cast<double>(d) / (gaps * gaps);
}

TopKResult topk_ef(const ParamVector& x, int k, const ParamVector& residual) {
  const Eigen::Index d = x.size();
  if (k < 1 || k > d) throw Error("topk: k out of range");
  if (residual.size() != d) throw Error("topk: residual dimension mismatch");
  const ParamVector y = x + residual;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(y[a]) > std::abs(y[b]);
  });
  TopKResult out;
  out.output = ParamVector::Zero(d);
  for (int j = 0; j < k; ++j) out.output[order[j]] = y[order[j]];
  out.residual = y - out.output;
  out.bits = static_cast<std::int64_t>(k) * (64 + 32);
  return out;
}

ParamVector clip_l2(const ParamVector& x, double clip) {
  const double norm = x.norm();
  if (norm <= clip) return x;
  return x * (clip / norm);
}

AggregateOutput aggregate(std::span<const ClientUpdate> updates,
                          const AggregationSpec& spec, Rng& rng,
                          ResidualStore* residuals, Rng* noise_rng) {
  spec.validate();
  if (updates.empty()) throw Error("aggregate: empty cohort");
  const Eigen::Index d = updates.front().delta.size();
  const CompressionSpec& cs = spec.compression;
  if (cs.kind == CompressionKind::kTopK && cs.error_feedback && residuals == nullptr) {
    throw Error("aggregate: error feedback needs a residual store");
  }

  AggregateOutput out;
  std::vector<ParamVector> processed;
  std::vector<double> weights;
  std::vector<double> steps;
  processed.reserve(updates.size());
  for (const ClientUpdate& u : updates) {
    if (u.delta.size() != d) throw Error("aggregate: delta dimension mismatch");
    ParamVector v;
    std::int64_t bits = 64 * static_cast<std::int64_t>(d);
    switch (cs.kind) {
      case CompressionKind::kNone:
        v = u.delta;
        break;
      case CompressionKind::kUnbiasedQuant: {
        auto q = quantize_unbiased(u.delta, cs.levels, rng);
        v = std::move(q.values);
        bits = q.bits;
        break;
      }
      case CompressionKind::kTopK: {
        ParamVector r = ParamVector::Zero(d);
        if (cs.error_feedback) {
          auto it = residuals->find(u.client_id);
          if (it != residuals->end()) r = it->second;
        }
        auto t = topk_ef(u.delta, cs.k, r);
        if (cs.error_feedback) (*residuals)[u.client_id] = std::move(t.residual);
        v = std::move(t.output);
        bits = t.bits;
        break;
      }
    }
    if (spec.dp) v = clip_l2(v, spec.dp->clip);
    out.payload_bytes.push_back((bits + 7) / 8);
    processed.push_back(std::move(v));
    weights.push_back(spec.weighting == Weighting::kUniform
                          ? 1.0
                          : static_cast<double>(u.examples_processed));
    steps.push_back(static_cast<double>(u.local_steps));
  }

  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw Error("degenerate weights");
  const double denom = spec.expected_weight_sum.value_or(total);

  if (spec.normalization == Normalization::kFedNova) {
    double tau_eff = 0.0;
    for (std::size_t i = 0; i < processed.size(); ++i) {
      if (steps[i] < 1.0) throw Error("aggregate: fednova needs local_steps >= 1");
      processed[i] /= steps[i];
      tau_eff += weights[i] / denom * steps[i];
    }
    out.delta = tau_eff * weighted_mean(processed, weights);
  } else {
    out.delta = weighted_mean(processed, weights);
  }
  if (spec.expected_weight_sum) out.delta *= total / denom;

  if (spec.dp && spec.dp->noise_z > 0.0) {
    const double stddev =
        spec.dp->noise_z * spec.dp->clip / static_cast<double>(updates.size());
    out.delta += (noise_rng != nullptr ? *noise_rng : rng).normal_vector(d, stddev);
  }
  return out;
}

}  // namespace fedsim
