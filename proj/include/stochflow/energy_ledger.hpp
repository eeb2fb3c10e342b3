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

#include <string>
#include <vector>

namespace stochflow {

// One ledger row: state quantities at time t plus the rates/increments of the
// step that starts at t.  The final row of a path carries zero increments.
struct LedgerRow {
  double t = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double dissipation_F = 0.0;
  double dissipation_Fstar = 0.0;
  double ito_correction = 0.0;
  double noise_work_increment = 0.0;
  double mass = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double norm_u = 0.0;
  int stopped = 0;
  // extra columns
  double stress_power = 0.0;
  double dissipation_mu = 0.0;
  double dissipation_eps = 0.0;
  double entropy = 0.0;
  double rho_div_u = 0.0;
  double fisher = 0.0;
  double div_u_inf = 0.0;
  double qv_empirical = 0.0;
  double qv_predicted = 0.0;
  double chi = 1.0;
  double dt = 0.0;

  double energy() const { return kinetic + potential; }
  double dissipation() const {
    return dissipation_F + dissipation_Fstar + dissipation_mu + dissipation_eps;
  }
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
};

const std::vector<std::string>& ledger_columns();
void write_ledger_csv(const std::string& path, const EnergyLedger& ledger);
EnergyLedger read_ledger_csv(const std::string& path);

}  // namespace stochflow
