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

#ifndef FEDSIM_SAMPLING_HPP_
#define FEDSIM_SAMPLING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/aggregate.hpp"
#include "fedsim/core.hpp"

namespace fedsim {

enum class SamplingScheme {
  kUniformWithoutReplacement,
  kWeightedWithReplacement,
  kFullParticipation,
  kDiurnal,
};

struct SamplingSpec {
  SamplingScheme scheme = SamplingScheme::kFullParticipation;
  int cohort = 1;   // m
  int period = 2;   // diurnal period P in rounds
};

struct ClientDescriptor {
  int id = 0;
  std::int64_t num_examples = 1;
  int group = 0;  // diurnal availability group, 0 or 1
};

// Client ids of the round-t cohort, ascending. With-replacement cohorts keep
// multiplicity.
std::vector<int> sample_cohort(const SamplingSpec& spec,
                               std::span<const ClientDescriptor> population,
                               int round, Rng& rng);

// Diurnal group available in round t: ⌊2t / P⌋ mod 2.
int available_group(int round, int period);

// The aggregation weighting that keeps E[Δ] aligned with the global
// objective under the given sampling scheme.
Weighting sanctioned_weighting(SamplingScheme scheme);

}  // namespace fedsim

#endif  // FEDSIM_SAMPLING_HPP_
