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
#include "stochflow/energy_ledger.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stochflow/error.hpp"

namespace stochflow {

namespace {

struct Column {
  const char* name;
  double LedgerRow::*field;
};

const std::vector<Column>& columns() {
  static const std::vector<Column> cols = {
      {"t", &LedgerRow::t},
      {"kinetic", &LedgerRow::kinetic},
      {"potential", &LedgerRow::potential},
      {"dissipation_F", &LedgerRow::dissipation_F},
      {"dissipation_Fstar", &LedgerRow::dissipation_Fstar},
      {"ito_correction", &LedgerRow::ito_correction},
      {"noise_work_increment", &LedgerRow::noise_work_increment},
      {"mass", &LedgerRow::mass},
      {"min_rho", &LedgerRow::min_rho},
      {"max_rho", &LedgerRow::max_rho},
      {"norm_u", &LedgerRow::norm_u},
      {"stopped", nullptr},
      {"stress_power", &LedgerRow::stress_power},
      {"dissipation_mu", &LedgerRow::dissipation_mu},
      {"dissipation_eps", &LedgerRow::dissipation_eps},
      {"entropy", &LedgerRow::entropy},
      {"rho_div_u", &LedgerRow::rho_div_u},
      {"fisher", &LedgerRow::fisher},
      {"div_u_inf", &LedgerRow::div_u_inf},
      {"qv_empirical", &LedgerRow::qv_empirical},
      {"qv_predicted", &LedgerRow::qv_predicted},
      {"chi", &LedgerRow::chi},
      {"dt", &LedgerRow::dt},
  };
  return cols;
}

}  // namespace

const std::vector<std::string>& ledger_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : columns()) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::MissingArtifact, "cannot open " + path + " for writing");
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
  out << '\n';
  char buf[40];
  for (const auto& row : ledger.rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (!cols[i].field) {
        out << row.stopped;
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", row.*(cols[i].field));
        out << buf;
      }
    }
    out << '\n';
  }
}

EnergyLedger read_ledger_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingArtifact, "missing ledger " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, path + ": empty ledger");
  const auto& cols = columns();
  std::vector<int> map;
  {
    std::stringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) {
      int found = -1;
      for (std::size_t i = 0; i < cols.size(); ++i)
        if (name == cols[i].name) found = static_cast<int>(i);
      map.push_back(found);
    }
  }
  for (std::size_t i = 0; i < 12; ++i) {
    bool seen = false;
    for (int m : map) seen = seen || m == static_cast<int>(i);
    if (!seen) fail(ErrorCode::ParseError, path + ": missing column " + cols[i].name);
  }
  EnergyLedger ledger;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LedgerRow row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    for (; std::getline(ss, cell, ','); ++k) {
      if (k >= map.size()) fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": too many fields");
      const int m = map[k];
      if (m < 0) continue;
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      if (!cols[static_cast<std::size_t>(m)].field)
        row.stopped = static_cast<int>(v);
      else
        row.*(cols[static_cast<std::size_t>(m)].field) = v;
    }
    if (k != map.size())
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected " +
                                      std::to_string(map.size()) + " fields, got " + std::to_string(k));
    ledger.rows.push_back(row);
  }
  return ledger;
}

}  // namespace stochflow
