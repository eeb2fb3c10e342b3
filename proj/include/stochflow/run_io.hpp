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

#include "stochflow/config.hpp"
#include "stochflow/galerkin_solver.hpp"

namespace stochflow {

extern const char* const kVersion;

struct FileEntry {
  std::string path;  // relative to the run directory, '/' separated
  std::uint64_t size = 0;
  std::string checksum;  // FNV-1a 64, hex
};

struct PathRecord {
  std::uint32_t path = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  double failure_time = 0.0;
  bool stopped = false;
  double tau = kInf;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::uint64_t base_seed = 0;
  std::vector<PathRecord> paths;
  std::vector<FileEntry> files;
};

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);
FileEntry file_entry(const std::string& root, const std::string& rel);
// every regular file under root except the manifest and analysis products, sorted
std::vector<FileEntry> inventory(const std::string& root);

void write_manifest(const std::string& run_dir, const RunManifest& m);
RunManifest read_manifest(const std::string& run_dir);

// snapshot j of a path: cp<j>_rho.f64, cp<j>_c.f64 (little-endian doubles) and cp<j>.json
void write_snapshot(const std::string& dir, int j, const Checkpoint& cp, const BasisConfig& basis,
                    std::uint64_t seed, std::uint32_t path);
Checkpoint read_snapshot(const std::string& dir, int j, const BasisConfig& basis);
int count_snapshots(const std::string& dir);

void write_f64(const std::string& path, const std::vector<double>& v);
std::vector<double> read_f64(const std::string& path, std::size_t expected);

std::string path_dir(const std::string& run_dir, std::uint32_t k);

}  // namespace stochflow
