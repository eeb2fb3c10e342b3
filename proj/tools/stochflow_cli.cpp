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
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "stochflow/analyze.hpp"
#include "stochflow/config.hpp"
#include "stochflow/ensemble.hpp"
#include "stochflow/error.hpp"

using namespace stochflow;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "run configuration (key = value text or JSON)");
  app->add_option("--out", c.out, "output run directory (overrides output.dir)");
  app->add_option_function<std::uint64_t>(
      "--seed", [&c](const std::uint64_t& s) { c.seed = s, c.seed_set = true; }, "base seed (overrides ensemble.seed)");
  app->add_option("--set", c.sets, "override a config key, e.g. --set solver.dt=5e-4");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ConfigInvalid, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed_set) cfg.ensemble.seed = c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

int print_checks(const AnalyzeResult& r) {
  for (auto it = r.doc["checks"].begin(); it != r.doc["checks"].end(); ++it)
    std::printf("%-14s %s\n", it.key().c_str(), it.value()["status"].get<std::string>().c_str());
  std::printf("overall        %s\n", r.pass ? "pass" : "fail");
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochflow: stochastic compressible non-Newtonian flow ensembles"};
  app.require_subcommand(1);

  Common sim_opt, ens_opt, cfg_opt;
  int ens_paths = 0, ens_workers = 0;
  bool ens_check = false;
  auto* sim = app.add_subcommand("simulate", "run a single path");
  add_common(sim, sim_opt);
  auto* ens = app.add_subcommand("ensemble", "run an ensemble of paths");
  add_common(ens, ens_opt);
  ens->add_option("--paths", ens_paths, "number of paths (overrides ensemble.paths)");
  ens->add_option("--workers", ens_workers, "concurrent paths (overrides ensemble.workers)");
  ens->add_flag("--check", ens_check, "run all diagnostics afterwards");
  auto* cfgcmd = app.add_subcommand("config", "print the resolved configuration");
  add_common(cfgcmd, cfg_opt);
  bool cfg_json = false;
  cfgcmd->add_flag("--json", cfg_json, "print the JSON mirror");

  std::string check_run, check_list;
  auto* chk = app.add_subcommand("check", "run diagnostics on a run directory");
  chk->add_option("run", check_run, "run directory")->required();
  chk->add_option("--checks", check_list, "comma-separated subset of checks");

  std::string ym_run;
  YmOptions ym_opt;
  auto* ym = app.add_subcommand("ym-analyze", "empirical Young measures of a run");
  ym->add_option("run", ym_run, "run directory")->required();
  ym->add_option("--time-cells", ym_opt.time_cells, "time cells of the partition");
  ym->add_option("--space-cells", ym_opt.space_cells, "cells per axis of the partition");

  std::vector<std::string> rep_in;
  std::string rep_out = "report";
  auto* rep = app.add_subcommand("report", "flatten diagnostics.json files into CSV tables");
  rep->add_option("diagnostics", rep_in, "diagnostics.json files")->required();
  rep->add_option("--out", rep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim || *ens) {
      RunConfig cfg = build_config(*sim ? sim_opt : ens_opt);
      if (*sim) cfg.ensemble.paths = 1;
      if (ens_paths > 0) cfg.ensemble.paths = ens_paths;
      if (ens_workers > 0) cfg.ensemble.workers = ens_workers;
      const EnsembleResult res = run_ensemble(cfg);
      std::printf("%s: %zu paths, %d failed\n", res.run_dir.c_str(), res.manifest.paths.size(), res.failed);
      for (const auto& p : res.manifest.paths)
        if (p.failed) std::printf("  path %u failed: %s\n", p.path, p.failure.c_str());
      int code = res.failed ? 1 : 0;
      if (ens_check && *ens) code |= print_checks(analyze_run(res.run_dir));
      return code;
    }
    if (*cfgcmd) {
      const RunConfig cfg = build_config(cfg_opt);
      cfg.validate();
      std::fputs((cfg_json ? config_to_json(cfg) : serialize_config(cfg)).c_str(), stdout);
      return 0;
    }
    if (*chk) {
      AnalyzeOptions opt;
      std::string cur;
      for (char ch : check_list + ",") {
        if (ch == ',') {
          if (!cur.empty()) opt.checks.push_back(cur);
          cur.clear();
        } else if (ch != ' ') {
          cur += ch;
        }
      }
      return print_checks(analyze_run(check_run, opt));
    }
    if (*ym) {
      const AnalyzeResult r = ym_analyze(ym_run, ym_opt);
      for (const auto& p : r.doc["paths"])
        std::printf("path %s: fenchel %.3e  jensen %.3e  %s\n", p["path"].dump().c_str(),
                    p["fenchel_max"].get<double>(), p["jensen_min"].get<double>(),
                    p["pass"].get<bool>() ? "pass" : "fail");
      return r.pass ? 0 : 1;
    }
    if (*rep) {
      for (const auto& f : emit_report(rep_in, rep_out)) std::printf("%s\n", f.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "stochflow: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stochflow: %s\n", e.what());
    return 2;
  }
  return 0;
}
