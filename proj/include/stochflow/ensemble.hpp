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

#include <string>
#include <vector>

#include "stochflow/config.hpp"
#include "stochflow/run_io.hpp"

namespace stochflow {

// output.dir under $STOCHFLOW_OUTPUT_ROOT when set (relative dirs only)
std::string resolve_output_dir(const RunConfig& cfg);
// $STOCHFLOW_WORKERS when set, else ensemble.workers
int resolve_workers(const RunConfig& cfg);

// config as stored in a run directory: output.dir and ensemble.workers are
// location/scheduling only and are normalized so reruns compare bit-exactly
RunConfig canonical_config(const RunConfig& cfg);

// resolution ladder of a run: domain.modes plus diagnostics.modes_ladder, ascending, unique
std::vector<int> modes_ladder(const RunConfig& cfg);
BasisConfig ladder_basis(const RunConfig& cfg, int modes);
std::string ladder_dir(const std::string& run_dir, std::uint32_t k, int modes);

struct EnsembleResult {
  std::string run_dir;
  RunManifest manifest;
  int failed = 0;
};

EnsembleResult run_ensemble(const RunConfig& cfg);

}  // namespace stochflow
