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

// Experiment configuration files.
//
// Flat `key = value` lines; `#` starts a comment. A `[section]` line prefixes
// the keys that follow with `section.`, so these are equivalent:
//
//   local.lr = 0.1          [local]
//                           lr = 0.1
//
// Every key has a default except `rounds`, `problem.kind` and `local.lr`.

#ifndef FEDSIM_CONFIG_HPP_
#define FEDSIM_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/engine.hpp"

namespace fedsim {

class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error("config key '" + key + "': " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

using KeyValues = std::map<std::string, std::string>;

struct SweepSpec {
  std::vector<double> eta_grid;
  std::vector<double> eta_s_grid;
  std::vector<int> epochs_grid;  // empty: keep the base duration
  std::vector<int> cohort_grid;  // empty: keep the base cohort
  std::string metric;
  bool maximize = false;
  std::vector<std::uint64_t> seeds;

  std::size_t cells() const;
};

struct ResolvedConfig {
  ExperimentConfig experiment;
  KeyValues values;  // every key, defaults filled in
  std::optional<SweepSpec> sweep;
};

KeyValues parse_key_values(std::istream& in);

// Validates keys, fills defaults and builds the typed config. `sweep.*` keys
// are accepted only when `allow_sweep` is set.
ResolvedConfig resolve_config(const KeyValues& raw, bool allow_sweep);
ResolvedConfig load_config(const std::string& path, bool allow_sweep);

// Re-resolves after overriding some keys (used by sweeps).
ResolvedConfig with_overrides(const ResolvedConfig& base, const KeyValues& overrides);

}  // namespace fedsim

#endif  // FEDSIM_CONFIG_HPP_
