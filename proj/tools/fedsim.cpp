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

// fedsim command-line entry point.
//
//   fedsim run CONFIG -o records.csv [--summary summary.json]
//   fedsim sweep CONFIG --grid grid.csv --selection selection.json
//   fedsim cost --algorithm scaffold --dim 125000 --sim-times 1,2 [...]
//   fedsim partition INPUT --method dirichlet --clients 10 --alpha 0.1 -o out

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fedsim/cli.hpp"

namespace {

std::string default_summary_path(const std::string& csv) {
  const auto dot = csv.rfind('.');
  const auto slash = csv.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? csv.substr(0, dot) : csv) + ".summary.json";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic federated optimization simulator"};
  app.require_subcommand(1);

  std::string config;
  std::string csv;
  std::string summary;
  auto* run = app.add_subcommand("run", "Run one experiment and write per-round records");
  run->add_option("config", config, "Config file")->required();
  run->add_option("-o,--out", csv, "Records CSV path")->required();
  run->add_option("--summary", summary, "Summary JSON path (default: <out>.summary.json)");

  std::string grid;
  std::string selection;
  auto* sweep = app.add_subcommand("sweep", "Grid-search learning rates, epochs and cohort size");
  sweep->add_option("config", config, "Sweep config file")->required();
  sweep->add_option("--grid", grid, "Grid CSV path")->required();
  sweep->add_option("--selection", selection, "Selection JSON path")->required();

  fedsim::CostArgs cost_args;
  auto* cost = app.add_subcommand("cost", "Estimate wall-clock time of one round");
  cost->add_option("--algorithm", cost_args.algorithm,
                   "fedavg|fedadam|fedyogi|fedpa|scaffold|mime|mimelite");
  cost->add_option("--dim", cost_args.dim, "Model dimension d")->required();
  cost->add_option("--bytes-per-param", cost_args.bytes_per_param, "Bytes per parameter");
  cost->add_option("--sim-times", cost_args.sim_times, "Simulated client compute seconds")
      ->delimiter(',');
  cost->add_option("--t-server", cost_args.t_server, "Server time in seconds");
  cost->add_option("--b-down", cost_args.params.b_down, "Download bandwidth, MB/s");
  cost->add_option("--b-up", cost_args.params.b_up, "Upload bandwidth, MB/s");
  cost->add_option("--r-comp", cost_args.params.r_comp, "Compute slowdown ratio");
  cost->add_option("--c-comp", cost_args.params.c_comp, "Fixed compute overhead, seconds");

  fedsim::PartitionArgs part_args;
  auto* partition = app.add_subcommand("partition", "Partition a dataset across clients");
  partition->add_option("input", part_args.input, "Dataset file (dirichlet) or partition file (mix)")
      ->required();
  partition->add_option("--method", part_args.method, "dirichlet|mix")->required();
  partition->add_option("--clients", part_args.clients, "Number of clients (dirichlet)");
  partition->add_option("--alpha", part_args.alpha, "Dirichlet concentration");
  partition->add_option("--s", part_args.s, "Shuffled fraction (mix)");
  partition->add_option("--seed", part_args.seed, "Seed");
  partition->add_option("-o,--out", part_args.output, "Output partition file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (*run) {
    return fedsim::cmd_run(config, csv, summary.empty() ? default_summary_path(csv) : summary,
                           std::cerr);
  }
  if (*sweep) return fedsim::cmd_sweep(config, grid, selection, std::cerr);
  if (*cost) return fedsim::cmd_cost(cost_args, std::cout, std::cerr);
  if (*partition) return fedsim::cmd_partition(part_args, std::cerr);
  return fedsim::kExitFailure;
}
