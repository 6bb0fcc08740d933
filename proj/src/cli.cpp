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

#include "fedsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "fedsim/engine.hpp"
#include "fedsim/problems.hpp"

namespace fedsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

nlohmann::ordered_json config_json(const KeyValues& values) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [key, value] : values) j[key] = value;
  return j;
}

// Non-finite values serialize as null.
nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

std::vector<std::string> metric_names(const Experiment& experiment) {
  std::vector<std::string> names;
  for (const auto& [name, value] : experiment.evaluate_model(experiment.model())) {
    names.push_back(name);
  }
  return names;
}

// Final value of `metric` for one sweep cell. Divergence yields NaN.
double sweep_metric(const ExperimentConfig& cfg, const std::string& metric) {
  try {
    Experiment experiment(build_problem(cfg.problem, cfg.seed), cfg);
    const auto names = metric_names(experiment);
    if (metric != "train_loss" &&
        std::find(names.begin(), names.end(), metric) == names.end()) {
      throw ConfigError("sweep.metric", "unknown metric '" + metric + "'");
    }
    const TrainingResult result = run_training(experiment, cfg.rounds);
    if (metric == "train_loss") {
      const double v = result.records.empty() ? experiment.train_loss(experiment.model())
                                              : result.records.back().train_loss;
      return std::isfinite(v) ? v : kNaN;
    }
    const auto metrics = result.records.empty()
                             ? experiment.evaluate_model(experiment.model())
                             : result.records.back().eval_metrics;
    const double v = metrics.at(metric);
    return std::isfinite(v) ? v : kNaN;
  } catch (const DivergenceError&) {
    return kNaN;
  }
}

nlohmann::ordered_json cell_json(const SweepCell& c, const std::string& duration_key,
                                 const std::string& metric) {
  nlohmann::ordered_json j;
  j["eta"] = c.eta;
  j["eta_s"] = c.eta_s;
  j[duration_key] = c.duration;
  j["cohort"] = c.cohort;
  j[metric] = number(c.mean);
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string records_header(const std::vector<std::string>& eval_names) {
  std::string h = "round,train_loss";
  for (const auto& name : eval_names) h += "," + name;
  h += ",cumulative_examples,cumulative_bytes_up,cumulative_bytes_down,"
       "estimated_round_time_s,cumulative_time_s";
  return h;
}

std::string records_row(const RoundRecord& rec, const std::vector<std::string>& eval_names) {
  std::string row = std::to_string(rec.round) + "," + format_double(rec.train_loss);
  for (const auto& name : eval_names) {
    row += ",";
    auto it = rec.eval_metrics.find(name);
    if (it != rec.eval_metrics.end()) row += format_double(it->second);
  }
  row += "," + std::to_string(rec.cumulative_examples) + "," +
         std::to_string(rec.cumulative_bytes_up) + "," +
         std::to_string(rec.cumulative_bytes_down) + "," +
         format_double(rec.estimated_round_time_s) + "," +
         format_double(rec.cumulative_time_s);
  return row;
}

int cmd_run(const std::string& config_path, const std::string& csv_path,
            const std::string& summary_path, std::ostream& err) {
  return guarded(err, [&] {
    const ResolvedConfig resolved = load_config(config_path, false);
    const ExperimentConfig& cfg = resolved.experiment;
    Experiment experiment(build_problem(cfg.problem, cfg.seed), cfg);
    const auto names = metric_names(experiment);

    std::ofstream csv = open_out(csv_path);
    csv << records_header(names) << "\n";
    std::optional<RoundRecord> last;
    int status = kExitOk;
    std::string failure;
    try {
      run_training(experiment, cfg.rounds, [&](const RoundRecord& rec) {
        csv << records_row(rec, names) << "\n";
        last = rec;
      });
    } catch (const DivergenceError& e) {
      status = kExitFailure;
      failure = e.what();
      err << "error: " << e.what() << "\n";
    }
    csv.flush();
    if (!csv) throw Error("failed writing '" + csv_path + "'");

    if (!summary_path.empty()) {
      nlohmann::ordered_json summary;
      summary["config"] = config_json(resolved.values);
      summary["status"] = status == kExitOk ? "ok" : "diverged";
      if (!failure.empty()) summary["error"] = failure;
      summary["rounds_completed"] = experiment.next_round();
      nlohmann::ordered_json final_metrics = nlohmann::ordered_json::object();
      final_metrics["train_loss"] = number(last ? last->train_loss
                                                : experiment.train_loss(experiment.model()));
      const auto metrics = last && !last->eval_metrics.empty()
                               ? last->eval_metrics
                               : experiment.evaluate_model(experiment.model());
      for (const auto& [name, value] : metrics) final_metrics[name] = number(value);
      if (last) {
        final_metrics["cumulative_examples"] = last->cumulative_examples;
        final_metrics["cumulative_bytes_up"] = last->cumulative_bytes_up;
        final_metrics["cumulative_bytes_down"] = last->cumulative_bytes_down;
        final_metrics["cumulative_time_s"] = last->cumulative_time_s;
      }
      summary["final"] = final_metrics;
      std::ofstream out = open_out(summary_path);
      out << summary.dump(2) << "\n";
    }
    return status;
  });
}

std::vector<SweepCell> rank_cells(const std::vector<SweepRow>& rows, bool maximize) {
  using Key = std::tuple<double, double, int, int>;
  std::map<Key, std::pair<double, int>> sums;
  for (const SweepRow& r : rows) {
    auto& [sum, count] = sums[{r.eta, r.eta_s, r.duration, r.cohort}];
    sum += r.metric;  // a single NaN seed poisons the cell
    ++count;
  }
  std::vector<SweepCell> cells;
  for (const auto& [key, acc] : sums) {
    cells.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                     std::get<3>(key), acc.first / acc.second});
  }
  std::stable_sort(cells.begin(), cells.end(), [maximize](const SweepCell& a, const SweepCell& b) {
    const bool an = std::isnan(a.mean);
    const bool bn = std::isnan(b.mean);
    if (an != bn) return bn;
    if (!an && a.mean != b.mean) return maximize ? a.mean > b.mean : a.mean < b.mean;
    return std::tie(a.eta_s, a.eta, a.duration, a.cohort) <
           std::tie(b.eta_s, b.eta, b.duration, b.cohort);
  });
  return cells;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path,
              const std::string& selection_path, std::ostream& err) {
  return guarded(err, [&] {
    const ResolvedConfig base = load_config(config_path, true);
    const SweepSpec& sw = *base.sweep;
    const bool epochs_mode = !sw.epochs_grid.empty() ||
                             base.experiment.local.duration_mode == DurationMode::kEpochs;
    const std::string duration_key = epochs_mode ? "epochs" : "steps";
    const std::vector<int> durations =
        sw.epochs_grid.empty() ? std::vector<int>{base.experiment.local.duration} : sw.epochs_grid;
    const std::vector<int> cohorts =
        sw.cohort_grid.empty() ? std::vector<int>{base.experiment.sampling.cohort} : sw.cohort_grid;

    std::vector<SweepRow> rows;
    std::vector<ExperimentConfig> configs;
    for (double eta : sw.eta_grid) {
      for (double eta_s : sw.eta_s_grid) {
        for (int dur : durations) {
          for (int cohort : cohorts) {
            for (std::uint64_t seed : sw.seeds) {
              KeyValues over{{"local.lr", format_double(eta)},
                             {"server.lr", format_double(eta_s)},
                             {"sampling.cohort", std::to_string(cohort)},
                             {"seed", std::to_string(seed)}};
              over[epochs_mode ? "local.epochs" : "local.steps"] = std::to_string(dur);
              ExperimentConfig cfg = with_overrides(base, over).experiment;
              cfg.threads = 1;  // parallelism is across cells
              configs.push_back(cfg);
              rows.push_back({eta, eta_s, dur, cohort, seed, 0.0});
            }
          }
        }
      }
    }
    err << "sweep: " << sw.cells() << " cells x " << sw.seeds.size() << " seeds\n";

    // Each cell is independent; results land in their own slot.
    const int threads = std::min<int>(resolve_thread_count(0), static_cast<int>(rows.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    {
      std::vector<std::jthread> pool;
      for (int w = 0; w < std::max(threads, 1); ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
              rows[i].metric = sweep_metric(configs[i], sw.metric);
            } catch (...) {
              std::lock_guard lock(error_mu);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
      return std::tie(a.eta, a.eta_s, a.duration, a.cohort, a.seed) <
             std::tie(b.eta, b.eta_s, b.duration, b.cohort, b.seed);
    });

    std::ofstream grid = open_out(grid_path);
    grid << "eta,eta_s," << duration_key << ",cohort,seed," << sw.metric << "\n";
    for (const SweepRow& r : rows) {
      grid << format_double(r.eta) << "," << format_double(r.eta_s) << "," << r.duration << ","
           << r.cohort << "," << r.seed << "," << format_double(r.metric) << "\n";
    }

    const auto cells = rank_cells(rows, sw.maximize);
    nlohmann::ordered_json sel;
    sel["metric"] = sw.metric;
    sel["goal"] = sw.maximize ? "maximize" : "minimize";
    sel["best"] = cell_json(cells.at(0), duration_key, sw.metric);
    sel["second_best"] =
        cells.size() > 1 ? cell_json(cells[1], duration_key, sw.metric) : nlohmann::ordered_json(nullptr);
    sel["config"] = config_json(base.values);
    std::ofstream out = open_out(selection_path);
    out << sel.dump(2) << "\n";
    return kExitOk;
  });
}

nlohmann::ordered_json cost_report(const CostArgs& args) {
  if (args.dim < 1) throw Error("cost: dimension must be >= 1");
  if (!(args.bytes_per_param > 0.0)) throw Error("cost: bytes per parameter must be > 0");
  const MessageSizes sizes = message_sizes(parse_algorithm(args.algorithm));
  const double model_mb = static_cast<double>(args.dim) * args.bytes_per_param / 1e6;
  const double s_down = sizes.down * model_mb;
  const double s_up = sizes.up * model_mb;
  const RoundTime rt = round_time_breakdown(s_down, s_up, args.sim_times, args.t_server, args.params);

  nlohmann::ordered_json j;
  j["t_comm_s"] = rt.comm_s;
  j["t_comp_s"] = rt.comp_s;
  j["t_round_s"] = rt.total_s;
  nlohmann::ordered_json in;
  in["algorithm"] = std::string(algorithm_name(parse_algorithm(args.algorithm)));
  in["d"] = args.dim;
  in["bytes_per_param"] = args.bytes_per_param;
  in["down_vectors"] = sizes.down;
  in["up_vectors"] = sizes.up;
  in["s_down_mb"] = s_down;
  in["s_up_mb"] = s_up;
  in["client_sim_times_s"] = args.sim_times;
  in["t_server_s"] = args.t_server;
  in["b_down_mb_s"] = args.params.b_down;
  in["b_up_mb_s"] = args.params.b_up;
  in["r_comp"] = args.params.r_comp;
  in["c_comp_s"] = args.params.c_comp;
  in["grad_evals"] = grad_evals_descriptor(parse_algorithm(args.algorithm));
  j["inputs"] = in;
  return j;
}

int cmd_cost(const CostArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << cost_report(args).dump(2) << "\n";
    return kExitOk;
  });
}

int cmd_partition(const PartitionArgs& args, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(args.input);
    if (!in) throw Error("cannot open '" + args.input + "'");
    std::vector<LabeledDataset> parts;
    if (args.method == "dirichlet") {
      if (args.clients < 1) throw Error("partition: --clients must be >= 1");
      parts = dirichlet_partition(read_dataset(in), args.clients, args.alpha, args.seed);
    } else if (args.method == "mix") {
      parts = shuffle_mix(read_partition(in), args.s, args.seed);
    } else {
      throw Error("partition: unknown method '" + args.method + "' (dirichlet|mix)");
    }
    std::ofstream out = open_out(args.output);
    write_partition(out, parts);
    out.flush();
    if (!out) throw Error("failed writing '" + args.output + "'");
    return kExitOk;
  });
}

}  // namespace fedsim
