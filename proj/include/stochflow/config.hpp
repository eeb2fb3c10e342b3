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

#include <cstdint>
#include <string>
#include <vector>

#include "stochflow/galerkin_solver.hpp"

namespace stochflow {

struct EnsembleSpec {
  int paths = 64;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct DiagnosticsSpec {
  bool weak_form = true;
  bool snapshots = true;
  double energy_tol = 1e-2;       // one-sided deterministic residual bound
  std::vector<double> guard_ladder;  // stopping statistics levels (<= solver.guard)
  std::vector<int> modes_ladder;     // extra resolutions for the defect ladder
  int ym_time_cells = 1;
  int ym_space_cells = 4;
};

struct RunConfig {
  SimulationSetup setup;
  EnsembleSpec ensemble;
  DiagnosticsSpec diagnostics;
  std::string output_dir = "run";

  void validate() const;
};

// flat "section.key = value" text; '#' starts a comment
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
// JSON mirror: nested sections or dotted keys
RunConfig parse_config_json(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
std::string config_to_json(const RunConfig& cfg);

// apply one "section.key = value" override
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace stochflow
