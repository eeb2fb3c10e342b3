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
#include "stochflow/young_measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "stochflow/error.hpp"

namespace stochflow {

std::size_t CellPartition::cell_count() const {
  std::size_t c = static_cast<std::size_t>(time_cells);
  for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(space_cells[static_cast<std::size_t>(a)]);
  return c;
}

void CellPartition::validate() const {
  if (dim < 1 || dim > 3) fail(ErrorCode::ConfigInvalid, "partition dim must be 1..3");
  if (time_cells < 1 || !(T > 0.0)) fail(ErrorCode::ConfigInvalid, "partition needs T > 0 and >= 1 time cell");
  for (int a = 0; a < dim; ++a)
    if (space_cells[static_cast<std::size_t>(a)] < 1 || !(length[static_cast<std::size_t>(a)] > 0.0))
      fail(ErrorCode::ConfigInvalid, "partition needs >= 1 cell and positive length per axis");
}

namespace {
int bucket(double v, double len, int cells) {
  const int k = static_cast<int>(std::floor(v / len * cells));
  return std::clamp(k, 0, cells - 1);
}
}  // namespace

std::size_t CellPartition::cell_of(double t, const std::array<double, 3>& x) const {
  std::size_t c = static_cast<std::size_t>(bucket(t, T, time_cells));
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    c = c * static_cast<std::size_t>(space_cells[ua]) + static_cast<std::size_t>(bucket(x[ua], length[ua], space_cells[ua]));
  }
  return c;
}

std::size_t state_dimension(int dim) {
  const auto d = static_cast<std::size_t>(dim);
  return 1 + d + 2 * d * d;
}

std::vector<std::string> state_labels(int dim) {
  std::vector<std::string> out{"r"};
  for (int a = 0; a < dim; ++a) out.push_back("w" + std::to_string(a + 1));
  for (const char* s : {"S", "D"})
    for (int a = 0; a < dim; ++a)
      for (int k = 0; k < dim; ++k) out.push_back(s + std::to_string(a + 1) + std::to_string(k + 1));
  return out;
}

EmpiricalYoungMeasure build_from_samples(const CellPartition& part, std::vector<YmSample> samples) {
  part.validate();
  EmpiricalYoungMeasure nu;
  nu.partition = part;
  nu.state_dim = samples.empty() ? 0 : samples.front().z.size();
  const std::size_t C = part.cell_count();
  std::vector<std::size_t> cell(samples.size());
  std::vector<std::size_t> count(C, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].z.size() != nu.state_dim) fail(ErrorCode::LengthMismatch, "samples differ in state dimension");
    cell[i] = part.cell_of(samples[i].t, samples[i].x);
    ++count[cell[i]];
  }
  for (std::size_t c = 0; c < C; ++c)
    if (count[c] == 0) fail(ErrorCode::EmptyCell, "cell " + std::to_string(c) + " has no samples");
  nu.offset.assign(C + 1, 0);
  for (std::size_t c = 0; c < C; ++c) nu.offset[c + 1] = nu.offset[c] + count[c];
  std::vector<std::size_t> pos(nu.offset.begin(), nu.offset.end() - 1);
  nu.samples.resize(samples.size());
  nu.weight.resize(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t at = pos[cell[i]]++;
    nu.weight[at] = 1.0 / static_cast<double>(count[cell[i]]);
    nu.samples[at] = std::move(samples[i]);
  }
  return nu;
}

EmpiricalYoungMeasure build_empirical(const std::vector<Snapshot>& snapshots, const Basis& b,
                                      const ConstitutiveModel& model, const CellPartition& part) {
  if (part.dim != b.dim()) fail(ErrorCode::GridMismatch, "partition and basis dimensions differ");
  const int d = b.dim();
  std::vector<YmSample> samples;
  for (const auto& snap : snapshots) {
    check_grid(b, snap.state.rho, "snapshot density");
    const GridVector u = synthesize(b, snap.state.c);
    const GridTensor g = gradient(b, snap.state.c);
    for (std::size_t i = 0; i < b.grid_size(); ++i) {
      YmSample s;
      s.path = snap.path;
      s.t = snap.state.t;
      const auto gi = b.grid_index(i);
      for (int a = 0; a < d; ++a) s.x[static_cast<std::size_t>(a)] = b.coordinate(a, gi[static_cast<std::size_t>(a)]);
      SymTensor D(d);
      for (int a = 0; a < d; ++a)
        for (int k = 0; k < d; ++k) D(a, k) = 0.5 * (g.at(a, k)[i] + g.at(k, a)[i]);
      const SymTensor S = stress_of_strain(model, D);
      s.z.reserve(state_dimension(d));
      s.z.push_back(snap.state.rho[i]);
      for (int a = 0; a < d; ++a) s.z.push_back(u.comp[static_cast<std::size_t>(a)][i]);
      for (int a = 0; a < d; ++a)
        for (int k = 0; k < d; ++k) s.z.push_back(S(a, k));
      for (int a = 0; a < d; ++a)
        for (int k = 0; k < d; ++k) s.z.push_back(D(a, k));
      samples.push_back(std::move(s));
    }
  }
  return build_from_samples(part, std::move(samples));
}

std::vector<double> pair(const EmpiricalYoungMeasure& nu, const Integrand& G) {
  const std::size_t C = nu.offset.size() - 1;
  std::vector<double> out(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    // weights are uniform within a cell: sum then divide once
    double acc = 0.0;
    for (std::size_t i = nu.offset[c]; i < nu.offset[c + 1]; ++i) acc += G(nu.samples[i].x, nu.samples[i].z);
    out[c] = acc / static_cast<double>(nu.cell_size(c));
  }
  return out;
}

// ---------------------------------------------------------------- defects

namespace {

void check_field(const SampledField& f) {
  if (f.x.size() != f.value.size() || f.value.size() != f.weight.size())
    fail(ErrorCode::LengthMismatch, "sampled field arrays differ in length");
}

double extrapolate(double M1, double X1, double M2, double X2) {
  // X(M) ~ X_inf + c / M through the last two ladder points
  return (M2 * X2 - M1 * X1) / (M2 - M1);
}

}  // namespace

DefectEstimate defect_estimate(const std::vector<SampledField>& sequence, const CellPartition& space,
                               const ScalarMap& F, const ScalarMap& G, const std::vector<double>& M,
                               double tol) {
  if (sequence.empty()) fail(ErrorCode::LengthMismatch, "empty sequence");
  if (M.size() < 2) fail(ErrorCode::ConfigInvalid, "truncation ladder needs at least two levels");
  space.validate();
  for (const auto& f : sequence) {
    check_field(f);
    for (double v : f.value) {
      const double fv = F(v), gv = G(v);
      if (std::abs(fv) > gv + tol * std::max(1.0, gv))
        fail(ErrorCode::DominationViolated, "|F| > G at sample value " + std::to_string(v));
    }
  }
  const auto& fine = sequence.back();
  const std::size_t C = space.cell_count();
  DefectEstimate est;
  est.M = M;
  for (double m : M) {
    std::vector<double> tf(C, 0.0), tg(C, 0.0);
    for (std::size_t i = 0; i < fine.value.size(); ++i) {
      const double v = fine.value[i];
      if (std::abs(v) <= m) continue;
      const std::size_t c = space.cell_of(0.0, fine.x[i]);
      tf[c] += fine.weight[i] * F(v);
      tg[c] += fine.weight[i] * G(v);
    }
    est.tail_F.push_back(std::move(tf));
    est.tail_G.push_back(std::move(tg));
  }
  const std::size_t L = M.size();
  for (std::size_t c = 0; c < C; ++c) {
    const double f = extrapolate(M[L - 2], est.tail_F[L - 2][c], M[L - 1], est.tail_F[L - 1][c]);
    const double g = extrapolate(M[L - 2], est.tail_G[L - 2][c], M[L - 1], est.tail_G[L - 1][c]);
    est.F_inf_raw.push_back(f);
    est.G_inf_raw.push_back(g);
    est.F_inf.push_back(f);
    est.G_inf.push_back(std::max(g, 0.0));
    est.total_G += est.G_inf.back();
    if (std::abs(f) > est.G_inf.back() + tol) {
      est.violating_cells.push_back(c);
      est.dominated = false;
    }
  }
  return est;
}

EquiIntegrabilityReport equi_integrability_check(const std::vector<SampledField>& family,
                                                 const std::vector<Candidate>& candidates,
                                                 const std::vector<double>& M) {
  if (family.empty()) fail(ErrorCode::LengthMismatch, "empty family");
  for (const auto& f : family) check_field(f);
  EquiIntegrabilityReport rep;
  for (const auto& cand : candidates) {
    EquiIntegrabilityRow row;
    row.name = cand.name;
    for (const auto& f : family) {
      double acc = 0.0;
      for (std::size_t i = 0; i < f.value.size(); ++i) acc += f.weight[i] * cand.g(std::abs(f.value[i]));
      row.values.push_back(acc);
      row.sup = std::max(row.sup, acc);
    }
    // least-squares slope of log value against log n over the last three members
    const std::size_t k0 = family.size() > 3 ? family.size() - 3 : 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t k = k0; k < family.size(); ++k) {
      if (!(row.values[k] > 0.0) || family[k].n <= 0) continue;
      const double x = std::log(static_cast<double>(family[k].n)), y = std::log(row.values[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double den = cnt * sxx - sx * sx;
    row.slope = cnt >= 2 && den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
    row.bounded = row.slope < 0.2;
    rep.candidates.push_back(row);
  }
  rep.M = M;
  for (double m : M) {
    double sup = 0.0;
    for (const auto& f : family) {
      double acc = 0.0;
      for (std::size_t i = 0; i < f.value.size(); ++i)
        if (std::abs(f.value[i]) > m) acc += f.weight[i] * std::abs(f.value[i]);
      sup = std::max(sup, acc);
    }
    rep.tail_sup.push_back(sup);
  }
  rep.tails_vanish = rep.tail_sup.empty() || rep.tail_sup.back() <= 0.01 * rep.tail_sup.front();
  return rep;
}

// ---------------------------------------------------------------- resolution ladders

namespace {

struct RunFields {
  Basis basis;
  std::vector<GridVector> u;  // per checkpoint
};

double grid_energy(const Basis& b, const ConstitutiveModel& model, const GridScalar& rho, const GridVector& u) {
  double e = 0.0;
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    double u2 = 0.0;
    for (const auto& comp : u.comp) u2 += comp[i] * comp[i];
    e += 0.5 * rho[i] * u2 + pressure_potential(model, rho[i]);
  }
  return e * b.cell_volume();
}

}  // namespace

DefectLadderReport energy_defect_ladder(const std::vector<LadderRun>& runs,
                                        const ConstitutiveModel& model, double tol) {
  if (runs.size() < 2) fail(ErrorCode::LadderMismatch, "ladder needs at least two resolutions");
  const auto& c0 = runs.front().basis;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const auto& c = runs[j].basis;
    if (c.dim != c0.dim || c.family != c0.family || c.length != c0.length)
      fail(ErrorCode::LadderMismatch, "ladder runs differ in domain");
    if (runs[j].checkpoints.size() != runs.front().checkpoints.size())
      fail(ErrorCode::LadderMismatch, "ladder runs differ in checkpoint count");
    for (std::size_t k = 0; k < runs[j].checkpoints.size(); ++k)
      if (std::abs(runs[j].checkpoints[k].state.t - runs.front().checkpoints[k].state.t) > 1e-12)
        fail(ErrorCode::LadderMismatch, "ladder runs differ in checkpoint times");
    if (j > 0) {
      const auto& p = runs[j - 1].basis;
      if (c.modes < p.modes) fail(ErrorCode::LadderMismatch, "ladder resolutions must not decrease");
      if (c.grid % p.grid != 0) fail(ErrorCode::LadderMismatch, "fine grid must refine the coarse grid");
    }
  }
  const int d = c0.dim;
  const double C = std::max(2.0, model.pressure_gamma - 1.0);
  std::vector<RunFields> fields;
  for (const auto& r : runs) {
    RunFields f{build_basis(r.basis), {}};
    for (const auto& cp : r.checkpoints) f.u.push_back(synthesize(f.basis, cp.state.c));
    fields.push_back(std::move(f));
  }

  DefectLadderReport rep;
  rep.monotone = true;
  rep.dominated = true;
  const std::size_t K = runs.front().checkpoints.size();
  for (std::size_t k = 0; k < K; ++k) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < runs.size(); ++j) {
      const Basis& bc = fields[j].basis;
      const Basis& bf = fields[j + 1].basis;
      const auto& sc = runs[j].checkpoints[k].state;
      const auto& sf = runs[j + 1].checkpoints[k].state;
      const GridVector& uf = fields[j + 1].u[k];
      DefectLadderPoint pt;
      pt.t = sc.t;
      pt.n_coarse = bc.modes();
      pt.n_fine = bf.modes();
      pt.domination = C;

      // coarse cells filled with fine samples
      const std::size_t cells = bc.grid_size();
      std::vector<double> cnt(cells, 0.0), r(cells, 0.0), e(cells, 0.0), p(cells, 0.0);
      std::vector<double> m(cells * static_cast<std::size_t>(d), 0.0), rww(cells * static_cast<std::size_t>(d), 0.0);
      double fine_energy = 0.0;
      for (std::size_t i = 0; i < bf.grid_size(); ++i) {
        const auto gi = bf.grid_index(i);
        std::size_t c = 0;
        for (int a = 0; a < d; ++a) {
          const auto ua = static_cast<std::size_t>(a);
          const double x = bf.coordinate(a, gi[ua]);
          c = c * static_cast<std::size_t>(bc.grid()) + static_cast<std::size_t>(bucket(x, c0.length[ua], bc.grid()));
        }
        const double rho = sf.rho[i];
        double u2 = 0.0;
        for (int a = 0; a < d; ++a) {
          const double w = uf.comp[static_cast<std::size_t>(a)][i];
          u2 += w * w;
          m[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] += rho * w;
          rww[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] += rho * w * w;
        }
        const double ed = 0.5 * rho * u2 + pressure_potential(model, rho);
        cnt[c] += 1.0;
        r[c] += rho;
        e[c] += ed;
        p[c] += pressure_value(model, rho);
        fine_energy += ed;
      }
      fine_energy *= bf.cell_volume();
      const double vol = bc.cell_volume();
      for (std::size_t c = 0; c < cells; ++c) {
        if (cnt[c] == 0.0) fail(ErrorCode::EmptyCell, "coarse cell without fine samples");
        const double rb = r[c] / cnt[c];
        double m2 = 0.0, tr = 0.0;
        for (int a = 0; a < d; ++a) {
          const double mb = m[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] / cnt[c];
          m2 += mb * mb;
          tr += rww[c * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)] / cnt[c] - mb * mb / rb;
        }
        const double bary = 0.5 * m2 / rb + pressure_potential(model, rb);
        pt.defect += vol * (e[c] / cnt[c] - bary);
        pt.theta += vol * tr;
        pt.lambda += vol * (p[c] / cnt[c] - pressure_value(model, rb));
      }
      pt.energy_gap = grid_energy(bc, model, sc.rho, fields[j].u[k]) - fine_energy;
      pt.dominated = pt.theta + pt.lambda <= C * pt.defect + tol * std::max(1.0, std::abs(pt.defect));
      rep.dominated = rep.dominated && pt.dominated;
      if (!(pt.defect < prev)) rep.monotone = false;
      prev = pt.defect;
      rep.points.push_back(pt);
    }
  }
  return rep;
}

// ---------------------------------------------------------------- serialization

void write_measure_csv(const std::string& path, const EmpiricalYoungMeasure& nu) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::MissingArtifact, "cannot write " + path);
  std::fprintf(f, "cell,weight,path,t");
  for (int a = 0; a < nu.partition.dim; ++a) std::fprintf(f, ",x%d", a + 1);
  const auto labels = state_labels(nu.partition.dim);
  for (std::size_t k = 0; k < nu.state_dim; ++k)
    std::fprintf(f, ",%s", k < labels.size() && nu.state_dim == labels.size() ? labels[k].c_str()
                                                                               : ("z" + std::to_string(k)).c_str());
  std::fprintf(f, "\n");
  for (std::size_t c = 0; c + 1 < nu.offset.size(); ++c)
    for (std::size_t i = nu.offset[c]; i < nu.offset[c + 1]; ++i) {
      const auto& s = nu.samples[i];
      std::fprintf(f, "%zu,%.17g,%u,%.17g", c, nu.weight[i], s.path, s.t);
      for (int a = 0; a < nu.partition.dim; ++a) std::fprintf(f, ",%.17g", s.x[static_cast<std::size_t>(a)]);
      for (double z : s.z) std::fprintf(f, ",%.17g", z);
      std::fprintf(f, "\n");
    }
  std::fclose(f);
}

void write_partition_json(const std::string& path, const EmpiricalYoungMeasure& nu) {
  nlohmann::ordered_json j;
  const auto& p = nu.partition;
  j["dim"] = p.dim;
  j["T"] = p.T;
  j["time_cells"] = p.time_cells;
  j["space_cells"] = std::vector<int>(p.space_cells.begin(), p.space_cells.begin() + p.dim);
  j["length"] = std::vector<double>(p.length.begin(), p.length.begin() + p.dim);
  j["cells"] = p.cell_count();
  j["samples"] = nu.samples.size();
  j["state_dim"] = nu.state_dim;
  if (nu.state_dim == state_dimension(p.dim)) j["state_labels"] = state_labels(p.dim);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::MissingArtifact, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace stochflow
