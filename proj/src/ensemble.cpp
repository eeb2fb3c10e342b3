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
#include "stochflow/ensemble.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <json.hpp>

#include "stochflow/diagnostics.hpp"
#include "stochflow/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace stochflow {

std::string resolve_output_dir(const RunConfig& cfg) {
  const char* root = std::getenv("STOCHFLOW_OUTPUT_ROOT");
  fs::path dir(cfg.output_dir);
  if (root && *root && dir.is_relative()) dir = fs::path(root) / dir;
  return dir.lexically_normal().string();
}

int resolve_workers(const RunConfig& cfg) {
  if (const char* w = std::getenv("STOCHFLOW_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(w, &end, 10);
    if (*w && *end == '\0' && v >= 1) return static_cast<int>(v);
    fail(ErrorCode::ConfigInvalid, std::string("STOCHFLOW_WORKERS: '") + w + "' is not a positive integer");
  }
  return cfg.ensemble.workers;
}

RunConfig canonical_config(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.output_dir = ".";
  c.ensemble.workers = 1;
  return c;
}

std::vector<int> modes_ladder(const RunConfig& cfg) {
  std::vector<int> m = cfg.diagnostics.modes_ladder;
  m.push_back(cfg.setup.basis.modes);
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

BasisConfig ladder_basis(const RunConfig& cfg, int modes) {
  BasisConfig b = cfg.setup.basis;
  b.grid = cfg.setup.basis.grid / cfg.setup.basis.modes * modes;
  b.modes = modes;
  return b;
}

std::string ladder_dir(const std::string& run_dir, std::uint32_t k, int modes) {
  return (fs::path(path_dir(run_dir, k)) / "ladder" / ("n" + std::to_string(modes))).string();
}

namespace {

void write_weak_form(const std::string& file, const std::vector<TestFunction>& tests, const WeakFormPath& w) {
  json j;
  j["names"] = json::array();
  for (const auto& t : tests) j["names"].push_back(t.name);
  j["continuity"] = w.continuity;
  j["momentum"] = w.momentum;
  j["momentum_no_noise"] = w.momentum_no_noise;
  write_file(file, j.dump(2) + "\n");
}

void write_trajectory(const std::string& dir, const Trajectory& tr, const BasisConfig& basis, bool snapshots) {
  fs::create_directories(dir);
  write_ledger_csv((fs::path(dir) / "ledger.csv").string(), tr.ledger);
  if (!snapshots) return;
  const std::string sdir = (fs::path(dir) / "snapshots").string();
  fs::create_directories(sdir);
  for (std::size_t j = 0; j < tr.checkpoints.size(); ++j)
    write_snapshot(sdir, static_cast<int>(j), tr.checkpoints[j], basis, tr.seed, tr.path);
}

struct PathOutcome {
  PathRecord record;
  std::vector<LedgerRow> rows;
};

PathOutcome run_path(const RunConfig& cfg, std::uint32_t k, const std::string& run_dir) {
  PathOutcome out;
  out.record.path = k;
  out.record.seed = cfg.ensemble.seed;
  const fs::path final_dir = path_dir(run_dir, k);
  const fs::path tmp = fs::path(run_dir) / "paths" / (".tmp_" + std::to_string(k));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    const Basis b(cfg.setup.basis);
    std::unique_ptr<WeakFormMonitor> monitor;
    StepObserver obs;
    if (cfg.diagnostics.weak_form) {
      monitor = std::make_unique<WeakFormMonitor>(b, cfg.setup.model, canonical_test_functions(b),
                                                  TimeProfile::CosineRamp, cfg.setup.solver.T);
      obs = monitor->observer();
    }
    Trajectory tr = solve_path(cfg.setup, cfg.ensemble.seed, k, monitor ? &obs : nullptr);
    if (monitor && !tr.checkpoints.empty()) monitor->finish(tr.checkpoints.back().state);
    write_trajectory(tmp.string(), tr, cfg.setup.basis, cfg.diagnostics.snapshots);
    if (monitor) write_weak_form((tmp / "weak_form.json").string(), monitor->tests(), monitor->result());
    out.rows = tr.ledger.rows;
    out.record.stopped = tr.stopped;
    out.record.tau = tr.tau;
    if (tr.failure) {
      out.record.failed = true;
      out.record.failure = *tr.failure;
      out.record.failure_time = tr.failure_time;
    }
    for (int m : cfg.diagnostics.modes_ladder) {
      if (m == cfg.setup.basis.modes) continue;
      SimulationSetup s = cfg.setup;
      s.basis = ladder_basis(cfg, m);
      const Trajectory lt = solve_path(s, cfg.ensemble.seed, k);
      write_trajectory((tmp / "ladder" / ("n" + std::to_string(m))).string(), lt, s.basis, true);
      if (lt.failure && !out.record.failed) {
        out.record.failed = true;
        out.record.failure = "ladder n=" + std::to_string(m) + ": " + *lt.failure;
        out.record.failure_time = lt.failure_time;
      }
    }
  } catch (const std::exception& e) {
    out.record.failed = true;
    out.record.failure = e.what();
    write_file((tmp / "failure.txt").string(), out.record.failure + "\n");
  }
  fs::remove_all(final_dir);
  fs::rename(tmp, final_dir);
  return out;
}

json ci_json(const MeanCI& c) {
  return {{"mean", c.mean}, {"se", c.se}, {"lo", c.lo}, {"hi", c.hi}, {"count", c.count}};
}

void prepare_run_dir(const std::string& dir) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) fail(ErrorCode::ConfigInvalid, "output.dir: " + dir + " is not a directory");
    const bool empty = fs::is_empty(dir);
    if (!empty && !fs::exists(fs::path(dir) / "manifest.json") && !fs::exists(fs::path(dir) / "paths"))
      fail(ErrorCode::ConfigInvalid, "output.dir: " + dir + " exists and is not a run directory");
    fs::remove_all(dir);
  }
  fs::create_directories(fs::path(dir) / "paths");
}

}  // namespace

EnsembleResult run_ensemble(const RunConfig& cfg_in) {
  cfg_in.validate();
  const std::string run_dir = resolve_output_dir(cfg_in);
  const int workers = resolve_workers(cfg_in);
  const RunConfig stored = canonical_config(cfg_in);
  prepare_run_dir(run_dir);
  write_file((fs::path(run_dir) / "config.txt").string(), serialize_config(stored));
  write_file((fs::path(run_dir) / "config.json").string(), config_to_json(stored));

  const int P = cfg_in.ensemble.paths;
  std::vector<PathOutcome> outcomes(static_cast<std::size_t>(P));
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
  for (int k = 0; k < P; ++k)
    outcomes[static_cast<std::size_t>(k)] = run_path(stored, static_cast<std::uint32_t>(k), run_dir);

  EnsembleResult res;
  res.run_dir = run_dir;
  std::vector<EnergyLedger> ledgers;
  json per_path = json::array();
  for (const auto& o : outcomes) {
    res.failed += o.record.failed ? 1 : 0;
    json r = {{"path", o.record.path}, {"failed", o.record.failed}, {"stopped", o.record.stopped}};
    if (!o.record.failed && !o.rows.empty()) {
      EnergyLedger l{o.rows};
      const PathSummary s = summarize_path(l);
      r["energy0"] = s.energy0;
      r["sup_energy"] = s.sup_energy;
      r["total_dissipation"] = s.total_dissipation;
      ledgers.push_back(std::move(l));
    }
    per_path.push_back(r);
  }
  json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = hex64(config_hash(stored));
  summary["paths"] = P;
  summary["failed"] = res.failed;
  if (!ledgers.empty()) {
    const EnsembleSummary es =
        summarize_ensemble(ledgers, cfg_in.setup.basis.modes, cfg_in.setup.initial.moment_r);
    summary["modes"] = es.n;
    summary["r"] = es.r;
    summary["energy0_r"] = ci_json(es.energy0_r);
    summary["sup_energy_r"] = ci_json(es.sup_energy_r);
    summary["dissipation_r"] = ci_json(es.dissipation_r);
  }
  summary["per_path"] = per_path;
  write_file((fs::path(run_dir) / "summary.json").string(), summary.dump(2) + "\n");

  RunManifest& m = res.manifest;
  m.version = kVersion;
  m.config_hash = hex64(config_hash(stored));
  m.base_seed = cfg_in.ensemble.seed;
  for (const auto& o : outcomes) m.paths.push_back(o.record);
  m.files = inventory(run_dir);
  write_manifest(run_dir, m);
  return res;
}

}  // namespace stochflow
