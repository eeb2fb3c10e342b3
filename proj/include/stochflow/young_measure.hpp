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

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stochflow/constitutive.hpp"
#include "stochflow/galerkin_solver.hpp"
#include "stochflow/spectral_basis.hpp"

namespace stochflow {

// (0,T) x box split into time_cells x prod(space_cells) cells.
struct CellPartition {
  int dim = 1;
  double T = 1.0;
  std::array<double, 3> length{1.0, 1.0, 1.0};
  int time_cells = 1;
  std::array<int, 3> space_cells{1, 1, 1};

  std::size_t cell_count() const;
  std::size_t cell_of(double t, const std::array<double, 3>& x) const;
  void validate() const;
};

struct YmSample {
  std::uint32_t path = 0;
  double t = 0.0;
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::vector<double> z;
};

// Per-cell uniform-weight clouds.  Samples are stored grouped by cell.
struct EmpiricalYoungMeasure {
  CellPartition partition;
  std::size_t state_dim = 0;
  std::vector<std::size_t> offset;  // cell c owns samples [offset[c], offset[c+1])
  std::vector<YmSample> samples;
  std::vector<double> weight;

  std::size_t cell_size(std::size_t c) const { return offset[c + 1] - offset[c]; }
};

// state layout z = (r, w_1..w_d, S_11..S_dd, D_11..D_dd); 22 coordinates when d = 3
std::size_t state_dimension(int dim);
std::vector<std::string> state_labels(int dim);

EmpiricalYoungMeasure build_from_samples(const CellPartition& part, std::vector<YmSample> samples);

struct Snapshot {
  std::uint32_t path = 0;
  SolverState state;
};
EmpiricalYoungMeasure build_empirical(const std::vector<Snapshot>& snapshots, const Basis& b,
                                      const ConstitutiveModel& model, const CellPartition& part);

using Integrand = std::function<double(const std::array<double, 3>& x, const std::vector<double>& z)>;
std::vector<double> pair(const EmpiricalYoungMeasure& nu, const Integrand& G);

// ---------------------------------------------------------------- defects

// Scalar field samples with quadrature weights (one member of a sequence U_n).
struct SampledField {
  int n = 0;
  std::vector<std::array<double, 3>> x;
  std::vector<double> value;
  std::vector<double> weight;
};

using ScalarMap = std::function<double(double)>;

struct DefectEstimate {
  std::vector<double> M;                      // truncation ladder
  std::vector<std::vector<double>> tail_F;    // [ladder][cell] at the finest member
  std::vector<std::vector<double>> tail_G;
  std::vector<double> F_inf;                  // per cell, two-point extrapolation in M
  std::vector<double> G_inf;
  std::vector<double> F_inf_raw, G_inf_raw;   // before clamping G_inf at 0
  std::vector<std::size_t> violating_cells;   // |F_inf| > G_inf + tol
  double total_G = 0.0;
  bool dominated = true;
};

DefectEstimate defect_estimate(const std::vector<SampledField>& sequence, const CellPartition& space,
                               const ScalarMap& F, const ScalarMap& G, const std::vector<double>& M,
                               double tol = 1e-12);

struct Candidate {
  std::string name;
  ScalarMap g;
};
struct EquiIntegrabilityRow {
  std::string name;
  std::vector<double> values;  // int g(|U_n|) per member
  double sup = 0.0;
  double slope = 0.0;          // log-log trend over the last members
  bool bounded = false;
};
struct EquiIntegrabilityReport {
  std::vector<EquiIntegrabilityRow> candidates;
  std::vector<double> M;
  std::vector<double> tail_sup;  // sup_n int_{|U_n|>M} |U_n|
  bool tails_vanish = false;
};
EquiIntegrabilityReport equi_integrability_check(const std::vector<SampledField>& family,
                                                 const std::vector<Candidate>& candidates,
                                                 const std::vector<double>& M);

// ---------------------------------------------------------------- resolution ladders

struct LadderRun {
  BasisConfig basis;
  std::vector<Checkpoint> checkpoints;
};

struct DefectLadderPoint {
  double t = 0.0;
  int n_coarse = 0;
  int n_fine = 0;
  double energy_gap = 0.0;   // E_coarse - <nu_fine, r|w|^2/2 + P(r)>
  double defect = 0.0;       // cellwise Jensen gap of the energy density
  double theta = 0.0;        // convection gap, trace norm
  double lambda = 0.0;       // pressure gap
  double domination = 0.0;   // max(2, gamma - 1)
  bool dominated = false;
};
struct DefectLadderReport {
  std::vector<DefectLadderPoint> points;  // checkpoint-major
  bool monotone = false;                  // defect strictly decreasing along the ladder at every checkpoint
  bool dominated = false;
};
DefectLadderReport energy_defect_ladder(const std::vector<LadderRun>& runs,
                                        const ConstitutiveModel& model, double tol = 1e-12);

// ---------------------------------------------------------------- serialization

void write_measure_csv(const std::string& path, const EmpiricalYoungMeasure& nu);
void write_partition_json(const std::string& path, const EmpiricalYoungMeasure& nu);

}  // namespace stochflow
