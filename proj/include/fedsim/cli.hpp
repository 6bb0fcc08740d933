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

// Subcommand implementations behind tools/fedsim. Each returns the process
// exit code: 0 on success, 2 on configuration errors, 1 on anything else.
// Diagnostics go to `err`.

#ifndef FEDSIM_CLI_HPP_
#define FEDSIM_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedsim/analysis.hpp"
#include "fedsim/config.hpp"
#include "fedsim/core.hpp"

namespace fedsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// printf("%.17g"); round-trips every double.
std::string format_double(double v);

// Records CSV header for a run whose evaluation produces `eval_names`.
std::string records_header(const std::vector<std::string>& eval_names);
std::string records_row(const RoundRecord& rec,
                        const std::vector<std::string>& eval_names);

// Writes the records CSV and a summary JSON holding every resolved key and
// the final metrics. An empty `summary_path` skips the summary.
int cmd_run(const std::string& config_path, const std::string& csv_path,
            const std::string& summary_path, std::ostream& err);

struct SweepRow {
  double eta = 0.0;
  double eta_s = 0.0;
  int duration = 0;  // epochs or steps, per the base config
  int cohort = 0;
  std::uint64_t seed = 0;
  double metric = 0.0;  // NaN when the run diverged
};

struct SweepCell {
  double eta = 0.0;
  double eta_s = 0.0;
  int duration = 0;
  int cohort = 0;
  double mean = 0.0;
};

// Groups rows by cell, averages over seeds and ranks. NaN cells rank last;
// ties go to the smaller η_s, then the smaller η.
std::vector<SweepCell> rank_cells(const std::vector<SweepRow>& rows,
                                  bool maximize);

// Writes one grid row per (cell, seed) and a selection JSON with `best` and
// `second_best` (null when the grid has a single cell).
int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& selection_path, std::ostream& err);

struct CostArgs {
  std::string algorithm = "fedavg";
  std::int64_t dim = 0;
  double bytes_per_param = 8.0;
  std::vector<double> sim_times{1.0};
  double t_server = 0.0;
  CostModelParams params;
};

// {t_comm_s, t_comp_s, t_round_s, inputs}, keys in that order.
nlohmann::ordered_json cost_report(const CostArgs& args);
int cmd_cost(const CostArgs& args, std::ostream& out, std::ostream& err);

struct PartitionArgs {
  std::string input;   // dataset (dirichlet) or partition file (mix)
  std::string method;  // "dirichlet" or "mix"
  int clients = 0;
  double alpha = 1.0;
  double s = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

int cmd_partition(const PartitionArgs& args, std::ostream& err);

}  // namespace fedsim

#endif  // FEDSIM_CLI_HPP_
