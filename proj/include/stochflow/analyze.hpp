/*
   Copyright 2026 The stochflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

namespace stochflow {

// integrity, paths, energy, bounds, qv, weak_form, entropy, orlicz, stopping, moments, defect_ladder
const std::vector<std::string>& check_names();

struct AnalyzeOptions {
  std::vector<std::string> checks;  // empty: all
  bool write_residuals = true;
};

struct AnalyzeResult {
  nlohmann::ordered_json doc;
  bool pass = false;
};

// Reads a run directory and writes <run>/diagnostics.json and <run>/residuals/*.csv.
AnalyzeResult analyze_run(const std::string& run_dir, const AnalyzeOptions& opt = {});

struct YmOptions {
  int time_cells = 0;   // 0: diagnostics.ym_time_cells of the run
  int space_cells = 0;  // 0: diagnostics.ym_space_cells
};
// Per-path empirical Young measures from the checkpoints, written under <run>/ym/.
AnalyzeResult ym_analyze(const std::string& run_dir, const YmOptions& opt = {});

// table name -> header columns (stable order)
const std::vector<std::pair<std::string, std::vector<std::string>>>& report_schemas();
// flat CSV tables, one per check family, from a set of diagnostics.json files
std::vector<std::string> emit_report(const std::vector<std::string>& diagnostics_files, const std::string& out_dir);

}  // namespace stochflow
