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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stochflow/constitutive.hpp"
#include "stochflow/energy_ledger.hpp"
#include "stochflow/noise.hpp"
#include "stochflow/rng.hpp"
#include "stochflow/spectral_basis.hpp"

namespace stochflow {

enum class SolverLevel { Regularized, Base };
enum class MassSolver { Auto, Dense, CG };

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SolverParams {
  SolverLevel level = SolverLevel::Base;
  double mu = 0.0;
  double epsilon = 0.0;
  double R = kInf;      // velocity cutoff level (Regularized)
  double guard = kInf;  // stopping-time guard
  double dt = 1e-3;
  double T = 0.5;
  double cfl_safety = 0.5;
  int checkpoints = 5;
  MassSolver mass_solver = MassSolver::Auto;
  double cg_tol = 1e-14;

  int steps() const;
  void validate() const;
};

enum class VelocityNormLaw { Fixed, Uniform };

struct InitialLaw {
  double rho_low = 1.0;
  double rho_high = 1.0;
  int density_modes = 2;
  double velocity_norm = 0.0;
  VelocityNormLaw norm_law = VelocityNormLaw::Uniform;
  int velocity_modes = 3;
  double decay = 1.0;
  double moment_r = 4.0;
  double moment_bound = kInf;

  void validate() const;
};

struct SimulationSetup {
  BasisConfig basis;
  ConstitutiveModel model;
  NoiseModel noise;
  SolverParams solver;
  InitialLaw initial;

  void validate() const;
};

struct SolverState {
  double t = 0.0;
  std::uint32_t step = 0;
  GridScalar rho;
  ModalVector c;
  RngKey key;
  bool stopped = false;
  double tau = kInf;  // stopping time once stopped
};

// [u]_R cutoff profile: 1 on (-inf, 0], 0 on [1, inf), C^1 cubic in between
double chi_blend(double s);
ModalVector velocity_cutoff(const ModalVector& c, double R);

// M c = rhs with M_ij = <rho omega_i, omega_j>_h (+ diag shift)
ModalVector mass_apply(const Basis& b, const GridScalar& rho, const ModalVector& c,
                       const std::vector<double>* shift = nullptr);
ModalVector assemble_mass_solve(const Basis& b, const GridScalar& rho, const ModalVector& rhs,
                                const std::vector<double>* shift = nullptr);
ModalVector mass_solve_cg(const Basis& b, const GridScalar& rho, const ModalVector& rhs,
                          const std::vector<double>* shift = nullptr,
                          const ModalVector* guess = nullptr, double tol = 1e-14);

SolverState sample_initial_data(const InitialLaw& law, const Basis& b, const RngKey& key);

// Everything one step computed, exposed to observers (diagnostics monitors).
struct StepView {
  const Basis* basis = nullptr;
  const ConstitutiveModel* model = nullptr;
  const SolverParams* params = nullptr;
  const SolverState* before = nullptr;
  const SolverState* after = nullptr;
  double chi = 1.0;
  double mu = 0.0;
  double epsilon = 0.0;
  const GridVector* u = nullptr;  // velocity of the state before the step
  const GridTensor* grad_u = nullptr;
  const ModalVector* noise_increment = nullptr;  // sum_k Pi_n(rho Pi_n F_k) dW_k
  const NoiseProjection* noise = nullptr;
  const WienerIncrement* dW = nullptr;
  const LedgerRow* row = nullptr;
};
using StepObserver = std::function<void(const StepView&)>;

// Energies and dissipation rates of a state (no increments).
LedgerRow evaluate_row(const Basis& b, const ConstitutiveModel& model, const NoiseModel& noise,
                       const SolverParams& params, const SolverState& s,
                       const std::vector<GridVector>* profiles = nullptr);

struct StepOptions {
  const std::vector<GridVector>* profiles = nullptr;
  LedgerRow* row = nullptr;  // filled with the ledger row of the state before the step
  const StepObserver* observer = nullptr;
};

SolverState step_regularized(const SolverState& s, const SolverParams& params,
                             const ConstitutiveModel& model, const NoiseModel& noise,
                             const Basis& b, const StepOptions& opt = {});
SolverState step_base(const SolverState& s, const SolverParams& params,
                      const ConstitutiveModel& model, const NoiseModel& noise, const Basis& b,
                      const StepOptions& opt = {});
SolverState stopping_time_update(const SolverState& s, double guard);

struct Checkpoint {
  std::uint32_t step = 0;
  SolverState state;
};

struct Trajectory {
  std::vector<Checkpoint> checkpoints;
  EnergyLedger ledger;
  bool stopped = false;
  double tau = kInf;
  std::optional<std::string> failure;  // error text including the failing time
  double failure_time = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
};

Trajectory solve_path(const SimulationSetup& setup, std::uint64_t seed, std::uint32_t path = 0,
                      const StepObserver* observer = nullptr);

// checkpoint step indices for N steps and the configured count
std::vector<std::uint32_t> checkpoint_steps(int steps, int checkpoints);

}  // namespace stochflow
