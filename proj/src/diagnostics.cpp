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
#include "stochflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochflow/error.hpp"

namespace stochflow {

namespace {
constexpr double kZ95 = 1.959963984540054;
}

MeanCI mean_ci(const std::vector<double>& xs) {
  MeanCI out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double v = 0.0;
    for (double x : xs) v += (x - out.mean) * (x - out.mean);
    v /= static_cast<double>(xs.size() - 1);
    out.se = std::sqrt(v / static_cast<double>(xs.size()));
  }
  out.lo = out.mean - kZ95 * out.se;
  out.hi = out.mean + kZ95 * out.se;
  return out;
}

MeanCI ratio_ci(const std::vector<double>& a, const std::vector<double>& b) {
  MeanCI out;
  out.count = a.size();
  if (a.empty() || a.size() != b.size()) return out;
  const MeanCI ma = mean_ci(a), mb = mean_ci(b);
  if (mb.mean == 0.0) return out;
  out.mean = ma.mean / mb.mean;
  if (a.size() > 1) {
    // residuals of the linearized ratio
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double z = (a[i] - out.mean * b[i]) / mb.mean;
      v += z * z;
    }
    v /= static_cast<double>(a.size() - 1);
    out.se = std::sqrt(v / static_cast<double>(a.size()));
  }
  out.lo = out.mean - kZ95 * out.se;
  out.hi = out.mean + kZ95 * out.se;
  return out;
}

EnergyTerms energy_terms(const SolverState& s, const ConstitutiveModel& model, const Basis& b) {
  check_grid(b, s.rho, "energy_terms");
  check_coef(b, s.c, "energy_terms");
  const int d = b.dim();
  const GridVector u = synthesize(b, s.c);
  const GridTensor g = gradient(b, s.c);
  EnergyTerms e;
  double ke = 0.0, pot = 0.0, fd = 0.0, fs = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    double u2 = 0.0;
    SymTensor D(d);
    for (int a = 0; a < d; ++a) {
      u2 += u.comp[static_cast<std::size_t>(a)][i] * u.comp[static_cast<std::size_t>(a)][i];
      for (int k = 0; k < d; ++k) D(a, k) = 0.5 * (g.at(a, k)[i] + g.at(k, a)[i]);
    }
    const SymTensor S = stress_of_strain(model, D);
    ke += 0.5 * s.rho[i] * u2;
    pot += pressure_potential(model, s.rho[i]);
    fd += potential_value(model, D);
    fs += conjugate_value(model, S);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) sp += S(a, k) * g.at(a, k)[i];
  }
  const double w = b.cell_volume();
  e.kinetic = w * ke;
  e.potential = w * pot;
  e.dissipation_F = w * fd;
  e.dissipation_Fstar = w * fs;
  e.stress_power = w * sp;
  return e;
}

void validate_ledger(const EnergyLedger& ledger) {
  if (ledger.rows.empty()) fail(ErrorCode::IncompleteLedger, "ledger has no rows");
  for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
    const auto& r = ledger.rows[i];
    const double vals[] = {r.t, r.kinetic, r.potential, r.dissipation_F, r.dissipation_Fstar,
                           r.ito_correction, r.noise_work_increment, r.mass, r.dt};
    for (double v : vals)
      if (!std::isfinite(v))
        fail(ErrorCode::IncompleteLedger, "ledger row " + std::to_string(i) + " has a non-finite entry");
    if (i + 1 < ledger.rows.size()) {
      const double gap = ledger.rows[i + 1].t - r.t;
      if (!(std::abs(gap - r.dt) <= 1e-9 * std::max(1.0, std::abs(r.t))))
        fail(ErrorCode::IncompleteLedger, "ledger rows " + std::to_string(i) + " and " +
                                              std::to_string(i + 1) + " are not one step apart");
    }
  }
}

std::vector<double> residual_series(const EnergyLedger& ledger, ResidualMode mode) {
  validate_ledger(ledger);
  const auto& rows = ledger.rows;
  std::vector<double> r(rows.size(), 0.0);
  const double e0 = rows.front().energy();
  double acc = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& p = rows[i - 1];
    acc += p.dt * p.dissipation();
    if (mode != ResidualMode::Deterministic) acc -= p.dt * p.ito_correction;
    if (mode == ResidualMode::PathwiseStochastic) acc -= p.noise_work_increment;
    r[i] = rows[i].energy() - e0 + acc;
  }
  return r;
}

ResidualReport ledger_residual(const EnergyLedger& ledger, ResidualMode mode, double tol) {
  ResidualReport rep;
  rep.mode = mode;
  rep.tol = tol;
  rep.residual = residual_series(ledger, mode);
  for (const auto& r : ledger.rows) rep.t.push_back(r.t);
  rep.max_residual = *std::max_element(rep.residual.begin(), rep.residual.end());
  for (double v : rep.residual) rep.max_abs = std::max(rep.max_abs, std::abs(v));
  rep.final_residual = rep.residual.back();
  rep.pass = rep.max_residual <= tol;
  return rep;
}

ResidualReport ledger_residual(const std::vector<EnergyLedger>& ensemble, double tol) {
  if (ensemble.empty()) fail(ErrorCode::IncompleteLedger, "ensemble has no ledgers");
  ResidualReport rep;
  rep.mode = ResidualMode::EnsembleMean;
  rep.tol = tol;
  std::vector<double> finals;
  for (const auto& l : ensemble) finals.push_back(residual_series(l, ResidualMode::EnsembleMean).back());
  rep.ensemble = mean_ci(finals);
  rep.final_residual = rep.ensemble.mean;
  rep.max_residual = *std::max_element(finals.begin(), finals.end());
  for (double v : finals) rep.max_abs = std::max(rep.max_abs, std::abs(v));
  rep.pass = rep.ensemble.lo <= tol;
  return rep;
}

PathSummary summarize_path(const EnergyLedger& ledger) {
  validate_ledger(ledger);
  PathSummary s;
  s.energy0 = ledger.rows.front().energy();
  for (const auto& r : ledger.rows) {
    s.sup_energy = std::max(s.sup_energy, r.energy());
    s.total_dissipation += r.dt * r.dissipation();
  }
  // last row carries no step
  s.total_dissipation -= ledger.rows.back().dt * ledger.rows.back().dissipation();
  s.stopped = ledger.rows.back().stopped != 0;
  s.tau = ledger.rows.back().t;
  for (const auto& r : ledger.rows)
    if (r.stopped) {
      s.tau = r.t;
      break;
    }
  return s;
}

EnsembleSummary summarize_ensemble(const std::vector<EnergyLedger>& ledgers, int n, double r) {
  EnsembleSummary e;
  e.n = n;
  e.r = r;
  std::vector<double> se, di, e0;
  for (const auto& l : ledgers) {
    e.paths.push_back(summarize_path(l));
    se.push_back(std::pow(e.paths.back().sup_energy, r));
    di.push_back(std::pow(e.paths.back().total_dissipation, r));
    e0.push_back(std::pow(e.paths.back().energy0, r));
  }
  e.sup_energy_r = mean_ci(se);
  e.dissipation_r = mean_ci(di);
  e.energy0_r = mean_ci(e0);
  return e;
}

MomentReport moment_report(const std::vector<EnsembleSummary>& ladder, double r) {
  MomentReport rep;
  rep.r = r;
  if (!(r >= 2.0)) fail(ErrorCode::ConfigInvalid, "moment order r must be >= 2");
  if (ladder.empty()) return rep;
  std::vector<EnsembleSummary> sorted = ladder;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  std::vector<MomentRow> rows;
  for (const auto& e : sorted) {
    std::vector<double> se, di, e0;
    for (const auto& p : e.paths) {
      se.push_back(std::pow(p.sup_energy, r));
      di.push_back(std::pow(p.total_dissipation, r));
      e0.push_back(std::pow(p.energy0, r));
    }
    MomentRow row;
    row.n = e.n;
    row.sup_energy_r = mean_ci(se);
    row.dissipation_r = mean_ci(di);
    row.bound = mean_ci(e0).mean + 1.0;  // scaled by C below
    rows.push_back(row);
  }
  const auto& base = rows.front();
  rep.C = std::max(base.sup_energy_r.hi, base.dissipation_r.hi) / base.bound;
  rep.pass = true;
  for (auto& row : rows) {
    row.bound *= rep.C;
    row.pass = row.sup_energy_r.lo <= row.bound && row.dissipation_r.lo <= row.bound;
    rep.pass = rep.pass && row.pass;
  }
  rep.rows = rows;
  return rep;
}

PointwiseBounds pointwise_bounds(const EnergyLedger& ledger, double rho_low, double rho_high,
                                 double rel_tol) {
  validate_ledger(ledger);
  PointwiseBounds pb;
  pb.min_rho = ledger.rows.front().min_rho;
  pb.max_rho = ledger.rows.front().max_rho;
  pb.positive = true;
  pb.within_band = true;
  double growth = 0.0;
  for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
    const auto& r = ledger.rows[i];
    if (i > 0) growth += ledger.rows[i - 1].dt * ledger.rows[i - 1].div_u_inf;
    pb.min_rho = std::min(pb.min_rho, r.min_rho);
    pb.max_rho = std::max(pb.max_rho, r.max_rho);
    pb.sup_u = std::max(pb.sup_u, r.norm_u);
    pb.positive = pb.positive && r.min_rho > 0.0;
    const double lo = rho_low * std::exp(-growth), hi = rho_high * std::exp(growth);
    if (r.min_rho < lo * (1.0 - rel_tol) || r.max_rho > hi * (1.0 + rel_tol)) pb.within_band = false;
    pb.band_low = lo;
    pb.band_high = hi;
  }
  return pb;
}

double orlicz_g0(const ConstitutiveModel& model, int dim, double t) {
  return envelope(model, t / std::sqrt(static_cast<double>(dim)));
}

OrliczReport orlicz_velocity_check(const SolverState& s, const ConstitutiveModel& model,
                                   const Basis& b, double tol) {
  if (b.family() != BasisFamily::Sine)
    fail(ErrorCode::WrongBasisFamily, "Orlicz velocity bound needs the Dirichlet (sine) family");
  check_coef(b, s.c, "orlicz_velocity_check");
  const int d = b.dim();
  const GridVector u = synthesize(b, s.c);
  const GridTensor g = gradient(b, s.c);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    double u2 = 0.0;
    SymTensor D(d);
    for (int a = 0; a < d; ++a) {
      u2 += u.comp[static_cast<std::size_t>(a)][i] * u.comp[static_cast<std::size_t>(a)][i];
      for (int k = 0; k < d; ++k) D(a, k) = 0.5 * (g.at(a, k)[i] + g.at(k, a)[i]);
    }
    lhs += orlicz_g0(model, d, std::sqrt(u2));
    rhs += potential_value(model, D);
  }
  OrliczReport rep;
  rep.lhs = b.cell_volume() * lhs;
  rep.rhs = 3.0 * b.cell_volume() * rhs;
  rep.pass = rep.lhs <= rep.rhs + tol * std::max(1.0, rep.rhs);
  return rep;
}

EntropyReport entropy_residual(const EnergyLedger& ledger, double epsilon) {
  validate_ledger(ledger);
  EntropyReport rep;
  const auto& rows = ledger.rows;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& r = rows[i];
    const double eps_term = -epsilon * r.fisher;
    const double rate = r.dt > 0.0 ? (rows[i + 1].entropy - r.entropy) / r.dt : 0.0;
    const double res = r.stopped ? 0.0 : rate + r.rho_div_u - eps_term;
    rep.t.push_back(r.t);
    rep.residual.push_back(res);
    rep.eps_term.push_back(eps_term);
    rep.max_abs = std::max(rep.max_abs, std::abs(res));
    if (eps_term > 0.0) rep.eps_term_nonpositive = false;
  }
  return rep;
}

QvReport martingale_qv_check(const std::vector<EnergyLedger>& ensemble) {
  QvReport rep;
  std::vector<double> emp, pred;
  for (const auto& l : ensemble) {
    double e = 0.0, p = 0.0;
    for (const auto& r : l.rows) {
      e += r.qv_empirical;
      p += r.qv_predicted;
    }
    emp.push_back(e);
    pred.push_back(p);
  }
  rep.empirical = mean_ci(emp).mean;
  rep.predicted = mean_ci(pred).mean;
  if (rep.predicted == 0.0) {
    rep.ratio.count = ensemble.size();
    rep.pass = rep.empirical == 0.0;
    rep.ratio.mean = rep.ratio.lo = rep.ratio.hi = rep.pass ? 1.0 : 0.0;
    return rep;
  }
  rep.ratio = ratio_ci(emp, pred);
  rep.pass = rep.ratio.lo <= 1.0 && 1.0 <= rep.ratio.hi;
  return rep;
}

double stopping_time_from_ledger(const EnergyLedger& ledger, double R) {
  validate_ledger(ledger);
  for (const auto& r : ledger.rows)
    if (r.norm_u > R) return r.t;
  return ledger.rows.back().t;
}

bool survived(const EnergyLedger& ledger, double R) {
  validate_ledger(ledger);
  for (const auto& r : ledger.rows)
    if (r.norm_u > R) return false;
  return true;
}

double schedule_a(double R) { return std::sqrt(R); }
double schedule_b(double R) { return 0.5 * std::log(R); }

StoppingReport stopping_statistics(const std::vector<double>& R,
                                   const std::vector<std::vector<int>>& survival) {
  if (R.size() != survival.size()) fail(ErrorCode::LengthMismatch, "guard ladder and survival table differ");
  std::vector<std::size_t> order(R.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return R[a] < R[b]; });
  StoppingReport rep;
  rep.monotone = true;
  rep.nested = true;
  for (std::size_t j : order) {
    if (!(R[j] > 1.0)) fail(ErrorCode::ConfigInvalid, "guard levels must exceed 1 for the a_R, b_R schedule");
    StoppingRow row;
    row.R = R[j];
    row.a_R = schedule_a(R[j]);
    row.b_R = schedule_b(R[j]);
    std::vector<double> x(survival[j].begin(), survival[j].end());
    row.survival = mean_ci(x);
    const double c = (1.0 - row.survival.mean) / (1.0 / row.a_R + 1.0 / row.b_R);
    rep.C = std::max(rep.C, c);
    rep.rows.push_back(row);
  }
  for (auto& row : rep.rows) row.envelope = 1.0 - rep.C / row.a_R - rep.C / row.b_R;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& lo = survival[order[i - 1]];
    const auto& hi = survival[order[i]];
    if (rep.rows[i].survival.mean < rep.rows[i - 1].survival.mean) rep.monotone = false;
    if (lo.size() != hi.size()) {
      rep.nested = false;
      continue;
    }
    for (std::size_t p = 0; p < lo.size(); ++p)
      if (lo[p] > hi[p]) rep.nested = false;
  }
  return rep;
}

}  // namespace stochflow
