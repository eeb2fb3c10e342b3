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
#include "stochflow/run_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "stochflow/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace stochflow {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

const char* const kVersion = "stochflow 0.1.0";

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_of(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

bool is_product(const std::string& rel) {
  return rel == "manifest.json" || rel == "diagnostics.json" || rel.rfind("residuals/", 0) == 0 ||
         rel.rfind("ym/", 0) == 0 || rel.rfind("report/", 0) == 0;
}

}  // namespace

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::MissingArtifact, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::MissingArtifact, "short write to " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingArtifact, "missing " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FileEntry file_entry(const std::string& root, const std::string& rel) {
  const std::string bytes = read_file((fs::path(root) / rel).string());
  return {rel, bytes.size(), hex64(fnv1a64(bytes.data(), bytes.size()))};
}

std::vector<FileEntry> inventory(const std::string& root) {
  std::vector<std::string> rels;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    if (!is_product(rel)) rels.push_back(rel);
  }
  std::sort(rels.begin(), rels.end());
  std::vector<FileEntry> out;
  for (const auto& r : rels) out.push_back(file_entry(root, r));
  return out;
}

void write_manifest(const std::string& run_dir, const RunManifest& m) {
  json j;
  j["version"] = m.version;
  j["config_hash"] = m.config_hash;
  j["base_seed"] = m.base_seed;
  j["paths"] = json::array();
  for (const auto& p : m.paths) {
    json r;
    r["path"] = p.path;
    r["seed"] = p.seed;
    r["failed"] = p.failed;
    r["failure"] = p.failure;
    r["failure_time"] = p.failure_time;
    r["stopped"] = p.stopped;
    r["tau"] = num(p.tau);
    j["paths"].push_back(r);
  }
  j["files"] = json::array();
  for (const auto& f : m.files) j["files"].push_back({{"path", f.path}, {"size", f.size}, {"fnv1a64", f.checksum}});
  write_file((fs::path(run_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& run_dir) {
  const std::string path = (fs::path(run_dir) / "manifest.json").string();
  const json j = parse_json_file(path);
  RunManifest m;
  try {
    m.version = j.at("version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.base_seed = j.at("base_seed").get<std::uint64_t>();
    for (const auto& r : j.at("paths")) {
      PathRecord p;
      p.path = r.at("path").get<std::uint32_t>();
      p.seed = r.at("seed").get<std::uint64_t>();
      p.failed = r.at("failed").get<bool>();
      p.failure = r.at("failure").get<std::string>();
      p.failure_time = r.at("failure_time").get<double>();
      p.stopped = r.at("stopped").get<bool>();
      p.tau = num_of(r.at("tau"));
      m.paths.push_back(p);
    }
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("size").get<std::uint64_t>(),
                         f.at("fnv1a64").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
  return m;
}

void write_f64(const std::string& path, const std::vector<double>& v) {
  std::string bytes(v.size() * sizeof(double), '\0');
  if (!v.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
  write_file(path, bytes);
}

std::vector<double> read_f64(const std::string& path, std::size_t expected) {
  const std::string bytes = read_file(path);
  if (bytes.size() != expected * sizeof(double))
    fail(ErrorCode::ParseError, path + ": expected " + std::to_string(expected) + " doubles, found " +
                                    std::to_string(bytes.size()) + " bytes");
  std::vector<double> v(expected);
  if (expected) std::memcpy(v.data(), bytes.data(), bytes.size());
  return v;
}

namespace {

std::size_t ipow(int b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= static_cast<std::size_t>(b);
  return r;
}

std::string cp_name(const std::string& dir, int j, const char* suffix) {
  return (fs::path(dir) / ("cp" + std::to_string(j) + suffix)).string();
}

}  // namespace

void write_snapshot(const std::string& dir, int j, const Checkpoint& cp, const BasisConfig& basis,
                    std::uint64_t seed, std::uint32_t path) {
  const auto& s = cp.state;
  write_f64(cp_name(dir, j, "_rho.f64"), s.rho);
  write_f64(cp_name(dir, j, "_c.f64"), s.c.c);
  json meta;
  meta["t"] = s.t;
  meta["step"] = cp.step;
  meta["dim"] = basis.dim;
  meta["family"] = basis.family == BasisFamily::Sine ? "sine" : "fourier";
  meta["modes"] = basis.modes;
  meta["grid"] = basis.grid;
  meta["length"] = {basis.length[0], basis.length[1], basis.length[2]};
  meta["rho_shape"] = json::array();
  for (int a = 0; a < basis.dim; ++a) meta["rho_shape"].push_back(basis.grid);
  meta["c_shape"] = {basis.dim, ipow(basis.modes, basis.dim)};
  meta["seed"] = seed;
  meta["path"] = path;
  meta["stopped"] = s.stopped;
  meta["tau"] = num(s.tau);
  write_file(cp_name(dir, j, ".json"), meta.dump(2) + "\n");
}

Checkpoint read_snapshot(const std::string& dir, int j, const BasisConfig& basis) {
  const std::string mpath = cp_name(dir, j, ".json");
  const json meta = parse_json_file(mpath);
  Checkpoint cp;
  try {
    if (meta.at("dim").get<int>() != basis.dim || meta.at("modes").get<int>() != basis.modes ||
        meta.at("grid").get<int>() != basis.grid)
      fail(ErrorCode::GridMismatch, mpath + ": snapshot shape does not match the run configuration");
    cp.step = meta.at("step").get<std::uint32_t>();
    cp.state.t = meta.at("t").get<double>();
    cp.state.step = cp.step;
    cp.state.stopped = meta.at("stopped").get<bool>();
    cp.state.tau = num_of(meta.at("tau"));
    cp.state.key = {meta.at("seed").get<std::uint64_t>(), meta.at("path").get<std::uint32_t>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, mpath + ": " + e.what());
  }
  cp.state.rho = read_f64(cp_name(dir, j, "_rho.f64"), ipow(basis.grid, basis.dim));
  cp.state.c.c = read_f64(cp_name(dir, j, "_c.f64"), static_cast<std::size_t>(basis.dim) * ipow(basis.modes, basis.dim));
  return cp;
}

int count_snapshots(const std::string& dir) {
  int j = 0;
  while (fs::exists(cp_name(dir, j, ".json"))) ++j;
  return j;
}

std::string path_dir(const std::string& run_dir, std::uint32_t k) {
  return (fs::path(run_dir) / "paths" / std::to_string(k)).string();
}

}  // namespace stochflow
