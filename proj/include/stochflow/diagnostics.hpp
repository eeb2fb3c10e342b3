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

#include "stochflow/constitutive.hpp"
#include "stochflow/energy_ledger.hpp"
#include "stochflow/galerkin_solver.hpp"
#include "stochflow/spectral_basis.hpp"

namespace stochflow {

// normal-approximation 95% interval of a sample mean
struct MeanCI {
  double mean = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
MeanCI mean_ci(const std::vector<double>& xs);
// ratio-of-means estimator sum(a)/sum(b) with delta-method interval
MeanCI ratio_ci(const std::vector<double>& a, const std::vector<double>& b);

struct EnergyTerms {
  double kinetic = 0.0;
  double potential = 0.0;
  double dissipation_F = 0.0;
  double dissipation_Fstar = 0.0;
  double stress_power = 0.0;  // int S : grad u
};
EnergyTerms energy_terms(const SolverState& s, const ConstitutiveModel& model, const Basis& b);

enum class ResidualMode { Deterministic, PathwiseStochastic, EnsembleMean };

struct ResidualReport {
  ResidualMode mode = ResidualMode::Deterministic;
  std::vector<double> t;
  std::vector<double> residual;  // per ledger row (single-path modes)
  double max_residual = 0.0;     // largest signed value
  double max_abs = 0.0;
  double final_residual = 0.0;
  MeanCI ensemble;               // EnsembleMean only: terminal residual without the martingale
  double tol = 0.0;
  bool pass = false;
};

// Residual r_n = E_n - E_0 + sum_{j<n} dt_j (D_j - I_j) - sum_{j<n} dM_j with D the
// dissipation rate, I the Ito correction and dM the realized noise work.
// Deterministic mode ignores I and dM; EnsembleMean drops dM.
std::vector<double> residual_series(const EnergyLedger& ledger, ResidualMode mode);
ResidualReport ledger_residual(const EnergyLedger& ledger, ResidualMode mode, double tol = 0.0);
ResidualReport ledger_residual(const std::vector<EnergyLedger>& ensemble, double tol = 0.0);
void validate_ledger(const EnergyLedger& ledger);

struct PathSummary {
  double energy0 = 0.0;
  double sup_energy = 0.0;
  double total_dissipation = 0.0;  // int_0^T int S : grad u (plus regularization)
  bool stopped = false;
  double tau = 0.0;
};
PathSummary summarize_path(const EnergyLedger& ledger);

struct EnsembleSummary {
  int n = 0;
  double r = 4.0;
  std::vector<PathSummary> paths;
  MeanCI sup_energy_r;
  MeanCI dissipation_r;
  MeanCI energy0_r;
};
EnsembleSummary summarize_ensemble(const std::vector<EnergyLedger>& ledgers, int n, double r);

struct MomentRow {
  int n = 0;
  MeanCI sup_energy_r;
  MeanCI dissipation_r;
  double bound = 0.0;  // C (E[E0^r] + 1)
  bool pass = false;
};
struct MomentReport {
  double r = 0.0;
  double C = 0.0;
  std::vector<MomentRow> rows;
  bool pass = false;
};
MomentReport moment_report(const std::vector<EnsembleSummary>& ladder, double r);

struct PointwiseBounds {
  double min_rho = 0.0;
  double max_rho = 0.0;
  double sup_u = 0.0;
  double band_low = 0.0;   // rho_low * exp(-int |div u|_inf)
  double band_high = 0.0;  // rho_high * exp(+int |div u|_inf)
  bool positive = false;
  bool within_band = false;
};
PointwiseBounds pointwise_bounds(const EnergyLedger& ledger, double rho_low, double rho_high,
                                 double rel_tol = 1e-10);

struct OrliczReport {
  double lhs = 0.0;  // int g0(|u|)
  double rhs = 0.0;  // 3 int F(Du)
  bool pass = false;
};
// g0(t) = g(t / sqrt(d)) with g the family envelope
double orlicz_g0(const ConstitutiveModel& model, int dim, double t);
OrliczReport orlicz_velocity_check(const SolverState& s, const ConstitutiveModel& model,
                                   const Basis& b, double tol = 1e-10);

struct EntropyReport {
  std::vector<double> t;
  std::vector<double> residual;  // d/dt int rho log rho + int rho div u + eps int |grad rho|^2 / rho
  std::vector<double> eps_term;  // -eps int |grad rho|^2 / rho
  double max_abs = 0.0;
  bool eps_term_nonpositive = true;
};
EntropyReport entropy_residual(const EnergyLedger& ledger, double epsilon);

// ---------------------------------------------------------------- weak forms

enum class TimeProfile { Constant, CosineRamp };

struct TestFunction {
  std::string name;
  GridScalar phi;         // spatial profile on the grid
  int direction = 0;      // momentum component tested
  ModalVector psi;        // Pi_n(phi e_direction)
};
// five fixed bump x polynomial profiles, compactly supported inside the box
std::vector<TestFunction> canonical_test_functions(const Basis& b);
TestFunction constant_test_function(const Basis& b);

struct WeakFormPath {
  std::vector<double> continuity;         // per test function
  std::vector<double> momentum;           // full residual including realized noise
  std::vector<double> momentum_no_noise;  // martingale term left in the residual
};

// Accumulates the per-step pairings of one path through a StepObserver.
class WeakFormMonitor {
 public:
  WeakFormMonitor(const Basis& b, const ConstitutiveModel& model, std::vector<TestFunction> tests,
                  TimeProfile profile, double T);
  StepObserver observer();
  void finish(const SolverState& final_state);
  WeakFormPath result() const;
  const std::vector<TestFunction>& tests() const { return tests_; }

 private:
  double phi_t(double t) const;
  void on_step(const StepView& v);
  void pairings(const GridScalar& rho, const ModalVector& c, std::vector<double>& mc,
                std::vector<double>& mm) const;

  const Basis* b_;
  ConstitutiveModel model_;
  std::vector<TestFunction> tests_;
  std::vector<GridScalar> dphi_;   // discrete gradients, [test * d + axis]
  std::vector<GridScalar> lapphi_;
  std::vector<GridTensor> gpsi_;   // grad of Pi_n psi
  std::vector<GridVector> psi_grid_;
  TimeProfile profile_;
  double T_;
  bool started_ = false;
  double t_last_ = 0.0;
  std::vector<double> mc_prev_, mm_prev_;
  std::vector<double> acc_c_, acc_m_, acc_noise_;
  std::vector<double> mc0_, mm0_;
};

struct WeakFormReport {
  std::vector<std::string> names;
  std::vector<double> continuity_max;  // max over paths of |residual|
  std::vector<double> momentum_max;
  std::vector<MeanCI> momentum_mean;   // martingale-free residual across paths
  bool pass = false;                   // every mean within 4 SE (+ roundoff floor) of 0
};
constexpr double kWeakFormFloor = 1e-12;
WeakFormReport weak_form_residual(const std::vector<WeakFormPath>& paths,
                                  const std::vector<std::string>& names);

// ---------------------------------------------------------------- martingale / stopping

struct QvReport {
  MeanCI ratio;           // empirical / predicted
  double empirical = 0.0; // ensemble mean of sum |dM|^2
  double predicted = 0.0;
  bool pass = false;      // CI covers 1
};
QvReport martingale_qv_check(const std::vector<EnergyLedger>& ensemble);

// tau_R read off a ledger: first time with |u| > R, or T when never exceeded
double stopping_time_from_ledger(const EnergyLedger& ledger, double R);
bool survived(const EnergyLedger& ledger, double R);

struct StoppingRow {
  double R = 0.0;
  double a_R = 0.0;
  double b_R = 0.0;
  MeanCI survival;
  double envelope = 0.0;  // 1 - C/a_R - C/b_R
};
struct StoppingReport {
  std::vector<StoppingRow> rows;
  double C = 0.0;
  bool monotone = false;
  bool nested = false;  // pathwise indicator nesting
};
double schedule_a(double R);
double schedule_b(double R);
// survival[j][p]: indicator tau_{R_j} = T for path p
StoppingReport stopping_statistics(const std::vector<double>& R,
                                   const std::vector<std::vector<int>>& survival);

}  // namespace stochflow
