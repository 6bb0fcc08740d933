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

#include "fedsim/core.hpp"

#include <cmath>

namespace fedsim {

ParamVector weighted_mean(std::span<const ParamVector> vectors,
                          std::span<const double> weights) {
  if (vectors.empty() || vectors.size() != weights.size()) {
    throw Error("weighted_mean: vector/weight count mismatch");
  }
  const Eigen::Index d = vectors.front().size();
  ParamVector sum = ParamVector::Zero(d);
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != d) throw Error("weighted_mean: length mismatch");
    if (weights[i] < 0.0 || !std::isfinite(weights[i])) {
      throw Error("weighted_mean: negative or non-finite weight");
    }
    if (weights[i] == 0.0) continue;
    sum += weights[i] * vectors[i];
    total += weights[i];
  }
  if (total <= 0.0) throw Error("degenerate weights");
  return sum / total;
}

bool all_finite(const ParamVector& v) { return v.allFinite(); }

}  // namespace fedsim
