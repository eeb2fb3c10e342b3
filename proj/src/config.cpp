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
#include "stochflow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "stochflow/error.hpp"

namespace stochflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument(key + ": '" + s + "' is not a number");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument(key + ": '" + s + "' is not an integer");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument(key + ": '" + s + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(v);
  while (std::getline(ss, cur, ','))
    if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + f(xs[i]);
  return out;
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SF_DOUBLE(K, FIELD)                                                                   \
  Entry {                                                                                     \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_double(k, v); }, \
        [](const RunConfig& c) { return fmt_double(c.FIELD); }                                \
  }
#define SF_INT(K, FIELD, TYPE)                                                                     \
  Entry {                                                                                          \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = static_cast<TYPE>(to_int(k, v)); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                                 \
  }
#define SF_BOOL(K, FIELD)                                                                   \
  Entry {                                                                                   \
    K, [](RunConfig& c, const std::string& k, const std::string& v) { c.FIELD = to_bool(k, v); }, \
        [](const RunConfig& c) { return std::string(c.FIELD ? "true" : "false"); }          \
  }

template <class E>
E pick(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> opts) {
  const std::string s = trim(v);
  for (const auto& [name, e] : opts)
    if (s == name) return e;
  std::string allowed;
  for (const auto& o : opts) allowed += std::string(allowed.empty() ? "" : "|") + o.first;
  throw std::invalid_argument(key + ": '" + s + "' is not one of " + allowed);
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      SF_INT("domain.dim", setup.basis.dim, int),
      Entry{"domain.length",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const auto parts = split_list(v);
              if (parts.empty() || parts.size() > 3) throw std::invalid_argument(k + ": expected 1 to 3 lengths");
              for (std::size_t i = 0; i < 3; ++i)
                c.setup.basis.length[i] = to_double(k, parts[std::min(i, parts.size() - 1)]);
            },
            [](const RunConfig& c) {
              const auto& L = c.setup.basis.length;
              return fmt_double(L[0]) + ", " + fmt_double(L[1]) + ", " + fmt_double(L[2]);
            }},
      Entry{"domain.family",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.setup.basis.family = pick<BasisFamily>(k, v, {{"sine", BasisFamily::Sine}, {"fourier", BasisFamily::Fourier}});
            },
            [](const RunConfig& c) { return std::string(c.setup.basis.family == BasisFamily::Sine ? "sine" : "fourier"); }},
      SF_INT("domain.modes", setup.basis.modes, int),
      SF_INT("domain.grid", setup.basis.grid, int),
      Entry{"model.family",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.setup.model.family = pick<PotentialFamily>(
                  k, v, {{"power_law", PotentialFamily::PowerLaw}, {"newtonian", PotentialFamily::Newtonian}});
            },
            [](const RunConfig& c) {
              return std::string(c.setup.model.family == PotentialFamily::PowerLaw ? "power_law" : "newtonian");
            }},
      SF_DOUBLE("model.p", setup.model.p),
      SF_DOUBLE("model.viscosity", setup.model.viscosity),
      SF_DOUBLE("model.mu", setup.model.mu),
      SF_DOUBLE("model.lambda", setup.model.lambda),
      SF_DOUBLE("model.pressure_a", setup.model.pressure_a),
      SF_DOUBLE("model.pressure_gamma", setup.model.pressure_gamma),
      SF_INT("noise.K", setup.noise.K, int),
      SF_DOUBLE("noise.alpha", setup.noise.alpha),
      SF_DOUBLE("noise.amplitude", setup.noise.amplitude),
      Entry{"solver.level",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.setup.solver.level =
                  pick<SolverLevel>(k, v, {{"base", SolverLevel::Base}, {"regularized", SolverLevel::Regularized}});
            },
            [](const RunConfig& c) {
              return std::string(c.setup.solver.level == SolverLevel::Base ? "base" : "regularized");
            }},
      SF_DOUBLE("solver.mu", setup.solver.mu),
      SF_DOUBLE("solver.epsilon", setup.solver.epsilon),
      SF_DOUBLE("solver.R", setup.solver.R),
      SF_DOUBLE("solver.guard", setup.solver.guard),
      SF_DOUBLE("solver.dt", setup.solver.dt),
      SF_DOUBLE("solver.T", setup.solver.T),
      SF_DOUBLE("solver.cfl_safety", setup.solver.cfl_safety),
      SF_INT("solver.checkpoints", setup.solver.checkpoints, int),
      Entry{"solver.mass_solver",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.setup.solver.mass_solver = pick<MassSolver>(
                  k, v, {{"auto", MassSolver::Auto}, {"dense", MassSolver::Dense}, {"cg", MassSolver::CG}});
            },
            [](const RunConfig& c) {
              switch (c.setup.solver.mass_solver) {
                case MassSolver::Dense: return std::string("dense");
                case MassSolver::CG: return std::string("cg");
                default: return std::string("auto");
              }
            }},
      SF_DOUBLE("solver.cg_tol", setup.solver.cg_tol),
      SF_DOUBLE("initial.rho_low", setup.initial.rho_low),
      SF_DOUBLE("initial.rho_high", setup.initial.rho_high),
      SF_INT("initial.density_modes", setup.initial.density_modes, int),
      SF_DOUBLE("initial.velocity_norm", setup.initial.velocity_norm),
      Entry{"initial.norm_law",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.setup.initial.norm_law =
                  pick<VelocityNormLaw>(k, v, {{"fixed", VelocityNormLaw::Fixed}, {"uniform", VelocityNormLaw::Uniform}});
            },
            [](const RunConfig& c) {
              return std::string(c.setup.initial.norm_law == VelocityNormLaw::Fixed ? "fixed" : "uniform");
            }},
      SF_INT("initial.velocity_modes", setup.initial.velocity_modes, int),
      SF_DOUBLE("initial.decay", setup.initial.decay),
      SF_DOUBLE("initial.moment_r", setup.initial.moment_r),
      SF_DOUBLE("initial.moment_bound", setup.initial.moment_bound),
      SF_INT("ensemble.paths", ensemble.paths, int),
      Entry{"ensemble.seed",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const std::string t = trim(v);
              errno = 0;
              char* end = nullptr;
              const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
              if (t.empty() || t[0] == '-' || *end != '\0' || errno == ERANGE)
                throw std::invalid_argument(k + ": '" + t + "' is not an unsigned 64-bit integer");
              c.ensemble.seed = x;
            },
            [](const RunConfig& c) { return std::to_string(c.ensemble.seed); }},
      SF_INT("ensemble.workers", ensemble.workers, int),
      SF_BOOL("diagnostics.weak_form", diagnostics.weak_form),
      SF_BOOL("diagnostics.snapshots", diagnostics.snapshots),
      SF_DOUBLE("diagnostics.energy_tol", diagnostics.energy_tol),
      Entry{"diagnostics.guard_ladder",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.diagnostics.guard_ladder.clear();
              for (const auto& s : split_list(v)) c.diagnostics.guard_ladder.push_back(to_double(k, s));
            },
            [](const RunConfig& c) { return join(c.diagnostics.guard_ladder, fmt_double); }},
      Entry{"diagnostics.modes_ladder",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.diagnostics.modes_ladder.clear();
              for (const auto& s : split_list(v)) c.diagnostics.modes_ladder.push_back(static_cast<int>(to_int(k, s)));
            },
            [](const RunConfig& c) { return join(c.diagnostics.modes_ladder, [](int m) { return std::to_string(m); }); }},
      SF_INT("diagnostics.ym_time_cells", diagnostics.ym_time_cells, int),
      SF_INT("diagnostics.ym_space_cells", diagnostics.ym_space_cells, int),
      Entry{"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = trim(v); },
            [](const RunConfig& c) { return c.output_dir; }},
  };
  return table;
}

#undef SF_DOUBLE
#undef SF_INT
#undef SF_BOOL

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& e : entries()) out.push_back(e.key);
  return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries())
    if (key == e.key) {
      try {
        e.set(cfg, key, value);
      } catch (const std::invalid_argument& ex) {
        fail(ErrorCode::ConfigInvalid, ex.what());
      }
      return;
    }
  fail(ErrorCode::ConfigInvalid, "unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return cfg;
}

namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    return;
  }
  std::string v;
  auto scalar = [](const nlohmann::json& x) -> std::string {
    if (x.is_string()) return x.get<std::string>();
    if (x.is_boolean()) return x.get<bool>() ? "true" : "false";
    if (x.is_number_integer()) return x.dump();
    if (x.is_number()) return fmt_double(x.get<double>());
    if (x.is_null()) return "inf";  // JSON has no infinity
    return x.dump();
  };
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) v += (i ? ", " : "") + scalar(j[i]);
  } else {
    v = scalar(j);
  }
  out.emplace_back(prefix, v);
}

}  // namespace

RunConfig parse_config_json(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, source + ": " + e.what());
  }
  std::vector<std::pair<std::string, std::string>> kv;
  flatten(j, "", kv);
  RunConfig cfg;
  for (const auto& [k, v] : kv) {
    try {
      set_config_value(cfg, k, v);
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, source + ": " + e.detail());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingArtifact, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_config_json(text, path);
  return parse_config(text, path);
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += std::string(e.key) + " = " + e.get(cfg) + "\n";
  return out;
}

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  for (const auto& e : entries()) {
    const std::string key = e.key;
    const auto dot = key.find('.');
    // values kept as strings so doubles round-trip exactly (and inf survives)
    j[key.substr(0, dot)][key.substr(dot + 1)] = e.get(cfg);
  }
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  std::string why;
  auto collect = [&](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      std::string msg = e.detail();
      if (e.code() == ErrorCode::ResolutionTooLow) msg = "domain.grid: " + msg;
      while (!msg.empty() && (msg.back() == ' ' || msg.back() == ';')) msg.pop_back();
      why += msg + "; ";
    }
  };
  collect([&] { Basis probe(setup.basis); });
  collect([&] { setup.model.validate(); });
  collect([&] { setup.noise.validate(); });
  collect([&] { setup.solver.validate(); });
  collect([&] { setup.initial.validate(); });
  if (ensemble.paths < 1) why += "ensemble.paths must be >= 1; ";
  if (ensemble.workers < 1) why += "ensemble.workers must be >= 1; ";
  if (!(diagnostics.energy_tol >= 0.0)) why += "diagnostics.energy_tol must be >= 0; ";
  for (double g : diagnostics.guard_ladder)
    if (!(g > 1.0) || g > setup.solver.guard) {
      why += "diagnostics.guard_ladder entries must lie in (1, solver.guard]; ";
      break;
    }
  for (int m : diagnostics.modes_ladder)
    if (m < 1) {
      why += "diagnostics.modes_ladder entries must be >= 1; ";
      break;
    }
  if (!diagnostics.modes_ladder.empty() && setup.basis.modes > 0 && setup.basis.grid % setup.basis.modes != 0)
    why += "diagnostics.modes_ladder needs domain.grid to be a multiple of domain.modes; ";
  else
    for (int m : diagnostics.modes_ladder) {
      if (m < 1) break;
      BasisConfig lb = setup.basis;
      lb.grid = setup.basis.grid / std::max(1, setup.basis.modes) * m;
      lb.modes = m;
      try {
        Basis probe(lb);
      } catch (const Error& e) {
        why += "diagnostics.modes_ladder (" + std::to_string(m) + "): " + e.detail() + "; ";
      }
    }
  if (diagnostics.ym_time_cells < 1 || diagnostics.ym_space_cells < 1)
    why += "diagnostics.ym_*_cells must be >= 1; ";
  if (output_dir.empty()) why += "output.dir must not be empty; ";
  if (!why.empty()) fail(ErrorCode::ConfigInvalid, why.substr(0, why.size() - 2));
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(serialize_config(cfg)); }

}  // namespace stochflow
