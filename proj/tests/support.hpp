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


// Test helpers shared by the CLI tests and the acceptance binary: scratch
// files, CSV reading and a brute-force rescan of sweep grids.

#ifndef FEDSIM_TESTS_SUPPORT_HPP_
#define FEDSIM_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace fedsim_test {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("fedsim_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

// Best and runner-up cells of a grid CSV, found by plain enumeration.
struct ScanCell {
  double eta, eta_s;
  long duration, cohort;
  double mean;
};

inline std::vector<ScanCell> rescan_grid(const std::filesystem::path& grid, bool maximize) {
  const auto rows = read_csv(grid);
  std::map<std::tuple<double, double, long, long>, std::vector<double>> groups;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& c = rows[r];
    groups[{std::stod(c[0]), std::stod(c[1]), std::stol(c[2]), std::stol(c[3])}].push_back(
        std::stod(c[5]));
  }
  std::vector<ScanCell> cells;
  for (const auto& [k, vals] : groups) {
    double s = 0.0;
    for (double v : vals) s += v;
    cells.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k),
                     s / static_cast<double>(vals.size())});
  }
  auto better = [maximize](const ScanCell& a, const ScanCell& b) {
    if (std::isnan(a.mean) != std::isnan(b.mean)) return std::isnan(b.mean);
    if (!std::isnan(a.mean) && a.mean != b.mean) return maximize ? a.mean > b.mean : a.mean < b.mean;
    return std::tie(a.eta_s, a.eta, a.duration, a.cohort) <
           std::tie(b.eta_s, b.eta, b.duration, b.cohort);
  };
  // Selection by repeated linear scans, no sort.
  std::vector<ScanCell> top;
  std::vector<bool> used(cells.size(), false);
  for (int pick = 0; pick < 2 && pick < static_cast<int>(cells.size()); ++pick) {
    int best = -1;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!used[i] && (best < 0 || better(cells[i], cells[best]))) best = static_cast<int>(i);
    }
    used[best] = true;
    top.push_back(cells[best]);
  }
  return top;
}

}  // namespace fedsim_test

#endif  // FEDSIM_TESTS_SUPPORT_HPP_
