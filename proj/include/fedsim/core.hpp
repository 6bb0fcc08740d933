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

#ifndef FEDSIM_CORE_HPP_
#define FEDSIM_CORE_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fedsim {

// Model parameters. All optimizer math is double precision.
using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a local trajectory produces a non-finite coordinate.
class DivergenceError : public Error {
 public:
  DivergenceError(int round, int step, int client)
      : Error("divergence detected (round " + std::to_string(round) +
              ", step " + std::to_string(step) + ", client " +
              std::to_string(client) + ")"),
        round_(round),
        step_(step),
        client_(client) {}

  int round() const { return round_; }
  int step() const { return step_; }
  int client() const { return client_; }

 private:
  int round_;
  int step_;
  int client_;
};

// Tags separating the independent randomness sources of an experiment.
enum class Purpose : std::uint64_t {
  kSampling = 0,
  kLocalTraining = 1,
  kCompression = 2,
  kPrivacyNoise = 3,
  kProblem = 4,
  kPartition = 5,
  kSplit = 6,
  kReplica = 7,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B1ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// Seed for the stream identified by (master_seed, round, client_id, purpose).
// The result depends only on its arguments, never on execution order.
constexpr std::uint64_t derive_stream(std::uint64_t master_seed,
                                      std::uint64_t round,
                                      std::uint64_t client_id,
                                      std::uint64_t purpose) {
  return mix64(master_seed ^ (round * 0x9E3779B97F4A7C15ULL) ^
               (client_id * 0xBF58476D1CE4E5B9ULL) ^
               (purpose * 0x94D049BB133111EBULL));
}

constexpr std::uint64_t derive_stream(std::uint64_t master_seed,
                                      std::uint64_t round,
                                      std::uint64_t client_id,
                                      Purpose purpose) {
  return derive_stream(master_seed, round, client_id,
                       static_cast<std::uint64_t>(purpose));
}

// A random stream. Thin wrapper over mt19937_64 with the draws the simulator
// needs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  ParamVector normal_vector(Eigen::Index d, double stddev = 1.0) {
    ParamVector v(d);
    for (Eigen::Index k = 0; k < d; ++k) v[k] = normal(0.0, stddev);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// One client's contribution to a round.
struct ClientUpdate {
  int client_id = 0;
  ParamVector delta;
  double weight = 1.0;
  int local_steps = 1;
  std::int64_t examples_processed = 0;
  std::int64_t bytes_up = 0;
  std::int64_t bytes_down = 0;
};

// One row of the metrics log. Cumulative fields never decrease in `round`.
struct RoundRecord {
  int round = 0;
  double train_loss = 0.0;
  std::map<std::string, double> eval_metrics;
  std::int64_t cumulative_examples = 0;
  std::int64_t cumulative_bytes_up = 0;
  std::int64_t cumulative_bytes_down = 0;
  double estimated_round_time_s = 0.0;
  double cumulative_time_s = 0.0;
};

// Σ w_i v_i / Σ w_i, reduced in the order given (callers pass ascending
// client id). Throws on length mismatch or when every weight is zero.
ParamVector weighted_mean(std::span<const ParamVector> vectors,
                          std::span<const double> weights);

bool all_finite(const ParamVector& v);

}  // namespace fedsim

#endif  // FEDSIM_CORE_HPP_
