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
#include "stochflow/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "stochflow/config.hpp"
#include "stochflow/diagnostics.hpp"
#include "stochflow/ensemble.hpp"
#include "stochflow/error.hpp"
#include "stochflow/run_io.hpp"
#include "stochflow/young_measure.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace stochflow {

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"integrity", "paths",   "energy", "bounds",
                                                 "qv",        "weak_form", "entropy", "orlicz",
                                                 "stopping",  "moments", "defect_ladder"};
  return names;
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ci_json(const MeanCI& c) {
  return {{"mean", num(c.mean)}, {"se", num(c.se)}, {"lo", num(c.lo)}, {"hi", num(c.hi)}, {"count", c.count}};
}

json skipped(const std::string& why) { return {{"status", "skipped"}, {"pass", true}, {"reason", why}}; }

json verdict(json j, bool pass) {
  json out;
  out["status"] = pass ? "pass" : "fail";
  out["pass"] = pass;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value();
  return out;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json parse_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

bool noise_on(const RunConfig& cfg) { return cfg.setup.noise.K > 0 && cfg.setup.noise.amplitude != 0.0; }

struct RunData {
  std::string dir;
  RunConfig cfg;
  RunManifest manifest;
  std::vector<std::uint32_t> accepted;   // path indices with a usable ledger
  std::vector<EnergyLedger> ledgers;     // aligned with accepted
};

RunData load_run(const std::string& run_dir) {
  RunData r;
  r.dir = run_dir;
  if (!fs::is_directory(run_dir)) fail(ErrorCode::MissingArtifact, "missing run directory " + run_dir);
  const std::string cfg_path = (fs::path(run_dir) / "config.txt").string();
  r.cfg = parse_config(read_file(cfg_path), cfg_path);
  r.manifest = read_manifest(run_dir);
  for (const auto& p : r.manifest.paths) {
    if (p.failed) continue;
    const std::string lpath = (fs::path(path_dir(run_dir, p.path)) / "ledger.csv").string();
    EnergyLedger l = read_ledger_csv(lpath);
    try {
      validate_ledger(l);
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, lpath + ": " + e.what());
    }
    r.accepted.push_back(p.path);
    r.ledgers.push_back(std::move(l));
  }
  return r;
}

std::vector<Checkpoint> load_checkpoints(const std::string& dir, const BasisConfig& basis) {
  const std::string sdir = (fs::path(dir) / "snapshots").string();
  const int n = count_snapshots(sdir);
  if (n == 0) fail(ErrorCode::MissingArtifact, "missing " + (fs::path(sdir) / "cp0.json").string());
  std::vector<Checkpoint> cps;
  for (int j = 0; j < n; ++j) cps.push_back(read_snapshot(sdir, j, basis));
  return cps;
}

json check_integrity(const RunData& r) {
  std::map<std::string, FileEntry> now;
  for (auto& f : inventory(r.dir)) now[f.path] = f;
  json mismatched = json::array(), missing = json::array(), extra = json::array();
  for (const auto& f : r.manifest.files) {
    auto it = now.find(f.path);
    if (it == now.end()) {
      missing.push_back(f.path);
      continue;
    }
    if (it->second.size != f.size || it->second.checksum != f.checksum) mismatched.push_back(f.path);
    now.erase(it);
  }
  for (const auto& [k, v] : now) extra.push_back(k);
  const bool hash_ok = r.manifest.config_hash == hex64(config_hash(r.cfg));
  const bool pass = mismatched.empty() && missing.empty() && extra.empty() && hash_ok;
  return verdict({{"files", r.manifest.files.size()},
                  {"mismatched", mismatched},
                  {"missing", missing},
                  {"unlisted", extra},
                  {"config_hash_matches", hash_ok}},
                 pass);
}

json check_paths(const RunData& r) {
  json failures = json::array();
  int stopped = 0;
  for (const auto& p : r.manifest.paths) {
    if (p.failed) failures.push_back({{"path", p.path}, {"time", p.failure_time}, {"error", p.failure}});
    stopped += p.stopped ? 1 : 0;
  }
  return verdict({{"paths", r.manifest.paths.size()}, {"failed", failures.size()}, {"stopped", stopped},
                  {"failures", failures}},
                 failures.empty());
}

json check_energy(const RunData& r, std::ostringstream* csv) {
  if (r.ledgers.empty()) return skipped("no accepted paths");
  if (csv) *csv << "path,t,deterministic,pathwise,drift_only\n";
  double max_det = -INFINITY, max_abs_path = 0.0;
  for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
    const auto det = residual_series(r.ledgers[i], ResidualMode::Deterministic);
    const auto pw = residual_series(r.ledgers[i], ResidualMode::PathwiseStochastic);
    const auto dr = residual_series(r.ledgers[i], ResidualMode::EnsembleMean);
    for (std::size_t k = 0; k < det.size(); ++k) {
      max_det = std::max(max_det, det[k]);
      max_abs_path = std::max(max_abs_path, std::abs(pw[k]));
      if (csv)
        *csv << r.accepted[i] << ',' << fmt(r.ledgers[i].rows[k].t) << ',' << fmt(det[k]) << ',' << fmt(pw[k])
             << ',' << fmt(dr[k]) << '\n';
    }
  }
  if (!noise_on(r.cfg)) {
    const double tol = r.cfg.diagnostics.energy_tol;
    return verdict({{"mode", "deterministic"},
                    {"paths", r.ledgers.size()},
                    {"max_residual", max_det},
                    {"max_abs_pathwise", max_abs_path},
                    {"tolerance", tol}},
                   max_det <= tol);
  }
  const ResidualReport rep = ledger_residual(r.ledgers, 0.0);
  return verdict({{"mode", "ensemble_mean"},
                  {"paths", r.ledgers.size()},
                  {"max_residual", rep.max_residual},
                  {"ensemble", ci_json(rep.ensemble)},
                  {"max_abs_pathwise", max_abs_path},
                  {"tolerance", 0.0}},
                 rep.pass);
}

json check_bounds(const RunData& r) {
  if (r.ledgers.empty()) return skipped("no accepted paths");
  double min_rho = INFINITY, max_rho = -INFINITY, drift_ratio = 0.0, max_drift = 0.0;
  bool positive = true, band = true, mass_ok = true;
  for (const auto& l : r.ledgers) {
    const PointwiseBounds pb = pointwise_bounds(l, r.cfg.setup.initial.rho_low, r.cfg.setup.initial.rho_high);
    min_rho = std::min(min_rho, pb.min_rho);
    max_rho = std::max(max_rho, pb.max_rho);
    positive = positive && pb.positive;
    band = band && pb.within_band;
    const double m0 = l.rows.front().mass;
    for (const auto& row : l.rows) {
      const double drift = std::abs(row.mass - m0) / std::max(std::abs(m0), 1e-300);
      max_drift = std::max(max_drift, drift);
      if (drift > 0.0) {
        const double allowed = 1e-12 * row.t;
        if (!(drift <= allowed)) mass_ok = false;
        drift_ratio = std::max(drift_ratio, allowed > 0.0 ? drift / allowed : INFINITY);
      }
    }
  }
  return verdict({{"paths", r.ledgers.size()},
                  {"min_rho", min_rho},
                  {"max_rho", max_rho},
                  {"max_relative_mass_drift", max_drift},
                  {"mass_drift_over_tolerance", num(drift_ratio)},
                  {"mass_tolerance_per_time", 1e-12},
                  {"positive", positive},
                  {"within_band", band}},
                 positive && mass_ok);
}

json check_qv(const RunData& r) {
  if (!noise_on(r.cfg)) return skipped("noise disabled");
  if (r.ledgers.size() < 2) return skipped("fewer than two accepted paths");
  const QvReport q = martingale_qv_check(r.ledgers);
  return verdict({{"paths", r.ledgers.size()},
                  {"empirical", q.empirical},
                  {"predicted", q.predicted},
                  {"ratio", ci_json(q.ratio)}},
                 q.pass);
}

json check_weak_form(const RunData& r) {
  if (!r.cfg.diagnostics.weak_form) return skipped("weak-form monitor disabled");
  if (r.accepted.empty()) return skipped("no accepted paths");
  std::vector<WeakFormPath> paths;
  std::vector<std::string> names;
  for (auto k : r.accepted) {
    const std::string file = (fs::path(path_dir(r.dir, k)) / "weak_form.json").string();
    const json j = parse_json(file);
    WeakFormPath w;
    try {
      names = j.at("names").get<std::vector<std::string>>();
      w.continuity = j.at("continuity").get<std::vector<double>>();
      w.momentum = j.at("momentum").get<std::vector<double>>();
      w.momentum_no_noise = j.at("momentum_no_noise").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, file + ": " + e.what());
    }
    if (w.continuity.size() != names.size() || w.momentum.size() != names.size() ||
        w.momentum_no_noise.size() != names.size())
      fail(ErrorCode::ParseError, file + ": residual arrays do not match the test list");
    paths.push_back(std::move(w));
  }
  const WeakFormReport rep = weak_form_residual(paths, names);
  json tests = json::array();
  for (std::size_t i = 0; i < names.size(); ++i)
    tests.push_back({{"name", names[i]},
                     {"continuity_max", rep.continuity_max[i]},
                     {"momentum_max", rep.momentum_max[i]},
                     {"momentum_mean", ci_json(rep.momentum_mean[i])},
                     {"pass", std::abs(rep.momentum_mean[i].mean) <= 4.0 * rep.momentum_mean[i].se + kWeakFormFloor}});
  return verdict({{"paths", paths.size()}, {"se_multiple", 4.0}, {"floor", kWeakFormFloor}, {"tests", tests}}, rep.pass);
}

json check_entropy(const RunData& r, std::ostringstream* csv) {
  if (r.ledgers.empty()) return skipped("no accepted paths");
  if (csv) *csv << "path,t,residual,eps_term\n";
  double max_abs = 0.0;
  bool nonpos = true;
  for (std::size_t i = 0; i < r.ledgers.size(); ++i) {
    const EntropyReport e = entropy_residual(r.ledgers[i], r.cfg.setup.solver.epsilon);
    max_abs = std::max(max_abs, e.max_abs);
    nonpos = nonpos && e.eps_term_nonpositive;
    if (csv)
      for (std::size_t k = 0; k < e.t.size(); ++k)
        *csv << r.accepted[i] << ',' << fmt(e.t[k]) << ',' << fmt(e.residual[k]) << ',' << fmt(e.eps_term[k]) << '\n';
  }
  return verdict({{"epsilon", r.cfg.setup.solver.epsilon}, {"max_abs_residual", max_abs}, {"eps_term_nonpositive", nonpos}},
                 nonpos);
}

json check_orlicz(const RunData& r) {
  if (r.cfg.setup.basis.family != BasisFamily::Sine) return skipped("needs the Dirichlet (sine) family");
  if (!r.cfg.diagnostics.snapshots) return skipped("snapshots disabled");
  if (r.accepted.empty()) return skipped("no accepted paths");
  const Basis b(r.cfg.setup.basis);
  double max_lhs = 0.0, max_rhs = 0.0, max_excess = -INFINITY;
  int count = 0;
  bool pass = true;
  for (auto k : r.accepted) {
    for (const auto& cp : load_checkpoints(path_dir(r.dir, k), r.cfg.setup.basis)) {
      const OrliczReport o = orlicz_velocity_check(cp.state, r.cfg.setup.model, b);
      max_lhs = std::max(max_lhs, o.lhs);
      max_rhs = std::max(max_rhs, o.rhs);
      max_excess = std::max(max_excess, o.lhs - o.rhs);
      pass = pass && o.pass;
      ++count;
    }
  }
  return verdict({{"checkpoints", count}, {"max_lhs", max_lhs}, {"max_rhs", max_rhs}, {"max_excess", max_excess},
                  {"tolerance", 1e-10}},
                 pass);
}

json check_stopping(const RunData& r) {
  const auto& R = r.cfg.diagnostics.guard_ladder;
  if (R.empty()) return skipped("no guard ladder");
  if (r.ledgers.empty()) return skipped("no accepted paths");
  std::vector<std::vector<int>> surv(R.size());
  for (std::size_t j = 0; j < R.size(); ++j)
    for (const auto& l : r.ledgers) surv[j].push_back(survived(l, R[j]) ? 1 : 0);
  const StoppingReport s = stopping_statistics(R, surv);
  json rows = json::array();
  for (const auto& row : s.rows)
    rows.push_back({{"R", row.R}, {"a_R", row.a_R}, {"b_R", row.b_R}, {"survival", ci_json(row.survival)},
                    {"envelope", row.envelope}});
  return verdict({{"C", s.C}, {"monotone", s.monotone}, {"nested", s.nested}, {"rows", rows}},
                 s.monotone && s.nested);
}

json check_moments(const RunData& r) {
  if (r.ledgers.empty()) return skipped("no accepted paths");
  std::vector<EnsembleSummary> ladder;
  ladder.push_back(summarize_ensemble(r.ledgers, r.cfg.setup.basis.modes, r.cfg.setup.initial.moment_r));
  for (int m : r.cfg.diagnostics.modes_ladder) {
    if (m == r.cfg.setup.basis.modes) continue;
    std::vector<EnergyLedger> ls;
    for (auto k : r.accepted) ls.push_back(read_ledger_csv((fs::path(ladder_dir(r.dir, k, m)) / "ledger.csv").string()));
    ladder.push_back(summarize_ensemble(ls, m, r.cfg.setup.initial.moment_r));
  }
  const MomentReport rep = moment_report(ladder, r.cfg.setup.initial.moment_r);
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"n", row.n},
                    {"sup_energy_r", ci_json(row.sup_energy_r)},
                    {"dissipation_r", ci_json(row.dissipation_r)},
                    {"bound", num(row.bound)},
                    {"pass", row.pass}});
  return verdict({{"r", rep.r}, {"C", num(rep.C)}, {"rows", rows}}, rep.pass);
}

json check_defect_ladder(const RunData& r) {
  const std::vector<int> ladder = modes_ladder(r.cfg);
  if (ladder.size() < 2) return skipped("fewer than two resolutions");
  if (!r.cfg.diagnostics.snapshots) return skipped("snapshots disabled");
  if (r.accepted.empty()) return skipped("no accepted paths");
  json pts = json::array();
  bool monotone = true, dominated = true;
  for (auto k : r.accepted) {
    std::vector<LadderRun> runs;
    for (int m : ladder) {
      const BasisConfig bc = ladder_basis(r.cfg, m);
      const std::string dir = m == r.cfg.setup.basis.modes ? path_dir(r.dir, k) : ladder_dir(r.dir, k, m);
      runs.push_back({bc, load_checkpoints(dir, bc)});
    }
    const DefectLadderReport rep = energy_defect_ladder(runs, r.cfg.setup.model, 1e-10);
    monotone = monotone && rep.monotone;
    dominated = dominated && rep.dominated;
    for (const auto& p : rep.points)
      pts.push_back({{"path", k},
                     {"t", p.t},
                     {"n_coarse", p.n_coarse},
                     {"n_fine", p.n_fine},
                     {"energy_gap", p.energy_gap},
                     {"defect", p.defect},
                     {"theta", p.theta},
                     {"lambda", p.lambda},
                     {"domination", p.domination},
                     {"dominated", p.dominated}});
  }
  json ms = json::array();
  for (int m : ladder) ms.push_back(m);
  return verdict({{"modes", ms}, {"tolerance", 1e-10}, {"monotone", monotone}, {"dominated", dominated}, {"points", pts}},
                 monotone && dominated);
}

}  // namespace

AnalyzeResult analyze_run(const std::string& run_dir, const AnalyzeOptions& opt) {
  std::vector<std::string> wanted = opt.checks.empty() ? check_names() : opt.checks;
  for (const auto& c : wanted)
    if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
      fail(ErrorCode::ConfigInvalid, "unknown check '" + c + "'");
  const RunData r = load_run(run_dir);
  const auto want = [&](const char* n) { return std::find(wanted.begin(), wanted.end(), n) != wanted.end(); };

  std::ostringstream energy_csv, entropy_csv;
  json checks;
  for (const auto& name : check_names()) {
    if (!want(name.c_str())) continue;
    json c;
    if (name == "integrity") c = check_integrity(r);
    else if (name == "paths") c = check_paths(r);
    else if (name == "energy") c = check_energy(r, opt.write_residuals ? &energy_csv : nullptr);
    else if (name == "bounds") c = check_bounds(r);
    else if (name == "qv") c = check_qv(r);
    else if (name == "weak_form") c = check_weak_form(r);
    else if (name == "entropy") c = check_entropy(r, opt.write_residuals ? &entropy_csv : nullptr);
    else if (name == "orlicz") c = check_orlicz(r);
    else if (name == "stopping") c = check_stopping(r);
    else if (name == "moments") c = check_moments(r);
    else c = check_defect_ladder(r);
    checks[name] = c;
  }
  AnalyzeResult res;
  res.pass = true;
  for (auto it = checks.begin(); it != checks.end(); ++it) res.pass = res.pass && it.value().at("pass").get<bool>();
  res.doc["version"] = kVersion;
  res.doc["run"] = fs::path(run_dir).lexically_normal().generic_string();
  res.doc["config_hash"] = r.manifest.config_hash;
  res.doc["paths"] = r.manifest.paths.size();
  res.doc["pass"] = res.pass;
  res.doc["checks"] = checks;
  write_file((fs::path(run_dir) / "diagnostics.json").string(), res.doc.dump(2) + "\n");
  if (opt.write_residuals) {
    const fs::path rdir = fs::path(run_dir) / "residuals";
    fs::create_directories(rdir);
    if (!energy_csv.str().empty()) write_file((rdir / "energy.csv").string(), energy_csv.str());
    if (!entropy_csv.str().empty()) write_file((rdir / "entropy.csv").string(), entropy_csv.str());
  }
  return res;
}

// ---------------------------------------------------------------- ym-analyze

AnalyzeResult ym_analyze(const std::string& run_dir, const YmOptions& opt) {
  const RunData r = load_run(run_dir);
  const auto& cfg = r.cfg;
  if (!cfg.diagnostics.snapshots) fail(ErrorCode::MissingArtifact, run_dir + ": run has no snapshots");
  const Basis b(cfg.setup.basis);
  const int d = cfg.setup.basis.dim;
  CellPartition part;
  part.dim = d;
  part.T = cfg.setup.solver.T;
  part.length = cfg.setup.basis.length;
  part.time_cells = opt.time_cells > 0 ? opt.time_cells : cfg.diagnostics.ym_time_cells;
  const int sc = opt.space_cells > 0 ? opt.space_cells : cfg.diagnostics.ym_space_cells;
  for (int a = 0; a < 3; ++a) part.space_cells[static_cast<std::size_t>(a)] = a < d ? sc : 1;
  part.validate();

  const fs::path ydir = fs::path(run_dir) / "ym";
  fs::create_directories(ydir);
  const std::size_t sd = 1 + static_cast<std::size_t>(d);
  const auto tensor = [&](const std::vector<double>& z, std::size_t off) {
    SymTensor t(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) t(i, j) = z[off + static_cast<std::size_t>(i * d + j)];
    return t;
  };
  const std::size_t s_off = sd, d_off = sd + static_cast<std::size_t>(d * d);
  json per_path = json::array();
  bool pass = true;
  for (auto k : r.accepted) {
    std::vector<Snapshot> snaps;
    for (auto& cp : load_checkpoints(path_dir(run_dir, k), cfg.setup.basis)) snaps.push_back({k, std::move(cp.state)});
    const EmpiricalYoungMeasure nu = build_empirical(snaps, b, cfg.setup.model, part);
    const fs::path pdir = ydir / ("path" + std::to_string(k));
    fs::create_directories(pdir);
    write_measure_csv((pdir / "measure.csv").string(), nu);
    write_partition_json((pdir / "partition.json").string(), nu);

    const auto& model = cfg.setup.model;
    const auto fy = pair(nu, [&](const std::array<double, 3>&, const std::vector<double>& z) {
      const SymTensor S = tensor(z, s_off), D = tensor(z, d_off);
      return potential_value(model, D) + conjugate_value(model, S);
    });
    const auto sd_pair = pair(nu, [&](const std::array<double, 3>&, const std::vector<double>& z) {
      return contract(tensor(z, s_off), tensor(z, d_off));
    });
    double fenchel = 0.0, jensen = INFINITY;
    const auto w2 = pair(nu, [&](const std::array<double, 3>&, const std::vector<double>& z) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += z[1 + static_cast<std::size_t>(a)] * z[1 + static_cast<std::size_t>(a)];
      return s;
    });
    std::vector<std::vector<double>> wa;
    for (int a = 0; a < d; ++a)
      wa.push_back(pair(nu, [a](const std::array<double, 3>&, const std::vector<double>& z) {
        return z[1 + static_cast<std::size_t>(a)];
      }));
    const auto rmean = pair(nu, [](const std::array<double, 3>&, const std::vector<double>& z) { return z[0]; });
    for (std::size_t c = 0; c < fy.size(); ++c) {
      fenchel = std::max(fenchel, std::abs(fy[c] - sd_pair[c]));
      double m2 = 0.0;
      for (int a = 0; a < d; ++a) m2 += wa[static_cast<std::size_t>(a)][c] * wa[static_cast<std::size_t>(a)][c];
      jensen = std::min(jensen, w2[c] - m2);
    }
    const bool ok = fenchel <= 1e-8 && jensen >= -1e-12;
    pass = pass && ok;
    per_path.push_back({{"path", k},
                        {"cells", nu.partition.cell_count()},
                        {"samples", nu.samples.size()},
                        {"mean_r", rmean},
                        {"fenchel_max", fenchel},
                        {"jensen_min", jensen},
                        {"pass", ok}});
  }
  AnalyzeResult res;
  res.pass = pass;
  res.doc["version"] = kVersion;
  res.doc["run"] = fs::path(run_dir).lexically_normal().generic_string();
  res.doc["time_cells"] = part.time_cells;
  res.doc["space_cells"] = sc;
  res.doc["state_labels"] = state_labels(d);
  res.doc["fenchel_tolerance"] = 1e-8;
  res.doc["jensen_tolerance"] = 1e-12;
  res.doc["pass"] = pass;
  res.doc["paths"] = per_path;
  write_file((ydir / "summary.json").string(), res.doc.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------- report

const std::vector<std::pair<std::string, std::vector<std::string>>>& report_schemas() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"integrity", {"run", "config_hash", "files", "mismatched", "missing", "unlisted", "pass"}},
      {"paths", {"run", "paths", "failed", "stopped", "pass"}},
      {"energy", {"run", "mode", "paths", "max_residual", "ensemble_mean", "ensemble_lo", "ensemble_hi", "tolerance", "pass"}},
      {"bounds", {"run", "paths", "min_rho", "max_rho", "max_relative_mass_drift", "positive", "within_band", "pass"}},
      {"qv", {"run", "paths", "empirical", "predicted", "ratio", "ratio_lo", "ratio_hi", "pass"}},
      {"weak_form", {"run", "test", "continuity_max", "momentum_max", "momentum_mean", "momentum_se", "pass"}},
      {"entropy", {"run", "epsilon", "max_abs_residual", "eps_term_nonpositive", "pass"}},
      {"orlicz", {"run", "checkpoints", "max_lhs", "max_rhs", "max_excess", "pass"}},
      {"stopping", {"run", "R", "a_R", "b_R", "survival", "survival_lo", "survival_hi", "envelope", "C", "monotone", "nested"}},
      {"moments", {"run", "n", "r", "sup_energy_r", "sup_energy_r_hi", "dissipation_r", "dissipation_r_hi", "bound", "pass"}},
      {"defect_ladder", {"run", "path", "t", "n_coarse", "n_fine", "energy_gap", "defect", "theta", "lambda", "domination", "dominated"}},
  };
  return s;
}

namespace {

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return cell(json(v.dump()));
}

using Row = std::vector<json>;

}  // namespace

std::vector<std::string> emit_report(const std::vector<std::string>& files, const std::string& out_dir) {
  std::map<std::string, std::vector<Row>> tables;
  std::vector<std::pair<double, Row>> stopping;
  for (const auto& f : files) {
    const json d = parse_json(f);
    if (!d.contains("checks") || !d.contains("run")) fail(ErrorCode::ParseError, f + ": not a diagnostics file");
    const json run = d["run"];
    const json& ch = d["checks"];
    auto active = [&](const char* n) { return ch.contains(n) && ch[n].value("status", "") != "skipped"; };
    try {
      if (active("integrity")) {
        const auto& c = ch["integrity"];
        tables["integrity"].push_back({run, d["config_hash"], c["files"], c["mismatched"].size(), c["missing"].size(),
                                       c["unlisted"].size(), c["pass"]});
      }
      if (active("paths")) {
        const auto& c = ch["paths"];
        tables["paths"].push_back({run, c["paths"], c["failed"], c["stopped"], c["pass"]});
      }
      if (active("energy")) {
        const auto& c = ch["energy"];
        const bool ens = c.contains("ensemble");
        tables["energy"].push_back({run, c["mode"], c["paths"], c["max_residual"], ens ? c["ensemble"]["mean"] : json(),
                                    ens ? c["ensemble"]["lo"] : json(), ens ? c["ensemble"]["hi"] : json(),
                                    c["tolerance"], c["pass"]});
      }
      if (active("bounds")) {
        const auto& c = ch["bounds"];
        tables["bounds"].push_back({run, c["paths"], c["min_rho"], c["max_rho"], c["max_relative_mass_drift"], c["positive"],
                                    c["within_band"], c["pass"]});
      }
      if (active("qv")) {
        const auto& c = ch["qv"];
        tables["qv"].push_back({run, c["paths"], c["empirical"], c["predicted"], c["ratio"]["mean"], c["ratio"]["lo"],
                                c["ratio"]["hi"], c["pass"]});
      }
      if (active("weak_form"))
        for (const auto& t : ch["weak_form"]["tests"])
          tables["weak_form"].push_back({run, t["name"], t["continuity_max"], t["momentum_max"],
                                         t["momentum_mean"]["mean"], t["momentum_mean"]["se"], t["pass"]});
      if (active("entropy")) {
        const auto& c = ch["entropy"];
        tables["entropy"].push_back({run, c["epsilon"], c["max_abs_residual"], c["eps_term_nonpositive"], c["pass"]});
      }
      if (active("orlicz")) {
        const auto& c = ch["orlicz"];
        tables["orlicz"].push_back({run, c["checkpoints"], c["max_lhs"], c["max_rhs"], c["max_excess"], c["pass"]});
      }
      if (active("stopping")) {
        const auto& c = ch["stopping"];
        for (const auto& row : c["rows"])
          stopping.push_back({row["R"].get<double>(),
                              {run, row["R"], row["a_R"], row["b_R"], row["survival"]["mean"], row["survival"]["lo"],
                               row["survival"]["hi"], row["envelope"], c["C"], c["monotone"], c["nested"]}});
      }
      if (active("moments")) {
        const auto& c = ch["moments"];
        for (const auto& row : c["rows"])
          tables["moments"].push_back({run, row["n"], c["r"], row["sup_energy_r"]["mean"], row["sup_energy_r"]["hi"],
                                       row["dissipation_r"]["mean"], row["dissipation_r"]["hi"], row["bound"],
                                       row["pass"]});
      }
      if (active("defect_ladder"))
        for (const auto& p : ch["defect_ladder"]["points"])
          tables["defect_ladder"].push_back({run, p["path"], p["t"], p["n_coarse"], p["n_fine"], p["energy_gap"],
                                             p["defect"], p["theta"], p["lambda"], p["domination"], p["dominated"]});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, f + ": " + e.what());
    }
  }
  std::stable_sort(stopping.begin(), stopping.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& s : stopping) tables["stopping"].push_back(std::move(s.second));

  fs::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& [name, cols] : report_schemas()) {
    std::string text;
    for (std::size_t i = 0; i < cols.size(); ++i) text += (i ? "," : "") + cols[i];
    text += "\n";
    for (const auto& row : tables[name]) {
      for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell(row[i]);
      text += "\n";
    }
    const std::string path = (fs::path(out_dir) / (name + ".csv")).string();
    write_file(path, text);
    written.push_back(path);
  }
  return written;
}

}  // namespace stochflow
