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

#include "fedsim/sampling.hpp"

#include <algorithm>

namespace fedsim {

namespace {

std::vector<int> without_replacement(std::vector<int> ids, int m, Rng& rng) {
  if (m < 0 || static_cast<std::size_t>(m) > ids.size()) {
    throw Error("sample_cohort: cohort size " + std::to_string(m) +
                " exceeds available population " + std::to_string(ids.size()));
  }
  const std::size_t n = ids.size();
  for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
    std::swap(ids[j], ids[j + rng.index(n - j)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

int available_group(int round, int period) {
  if (period < 1) throw Error("diurnal period must be >= 1");
  // ⌊t / (P/2)⌋ computed in integers.
  return static_cast<int>((2LL * round / period) % 2);
}

std::vector<int> sample_cohort(const SamplingSpec& spec,
                               std::span<const ClientDescriptor> population,
                               int round, Rng& rng) {
  if (population.empty()) throw Error("sample_cohort: empty population");
  std::vector<int> ids;
  ids.reserve(population.size());
  switch (spec.scheme) {
    case SamplingScheme::kFullParticipation:
      for (const auto& c : population) ids.push_back(c.id);
      std::sort(ids.begin(), ids.end());
      return ids;
    case SamplingScheme::kUniformWithoutReplacement:
      for (const auto& c : population) ids.push_back(c.id);
      return without_replacement(std::move(ids), spec.cohort, rng);
    case SamplingScheme::kWeightedWithReplacement: {
      if (spec.cohort < 1) throw Error("sample_cohort: cohort must be >= 1");
      std::vector<double> w;
      for (const auto& c : population) w.push_back(static_cast<double>(c.num_examples));
      std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
      for (int j = 0; j < spec.cohort; ++j) {
        ids.push_back(population[pick(rng.engine())].id);
      }
      std::sort(ids.begin(), ids.end());
      return ids;
    }
    case SamplingScheme::kDiurnal: {
      const int group = available_group(round, spec.period);
      for (const auto& c : population) {
        if (c.group == group) ids.push_back(c.id);
      }
      return without_replacement(std::move(ids), spec.cohort, rng);
    }
  }
  return ids;
}

Weighting sanctioned_weighting(SamplingScheme scheme) {
  switch (scheme) {
    case SamplingScheme::kWeightedWithReplacement:
      return Weighting::kUniform;
    case SamplingScheme::kUniformWithoutReplacement:
    case SamplingScheme::kFullParticipation:
    case SamplingScheme::kDiurnal:
      return Weighting::kExampleWeighted;
  }
  return Weighting::kExampleWeighted;
}

}  // namespace fedsim
