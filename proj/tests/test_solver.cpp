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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dense_oracle.hpp"
#include "stochflow/error.hpp"
#include "stochflow/galerkin_solver.hpp"

using namespace stochflow;

namespace {

SimulationSetup small_setup(int n, bool noisy) {
  SimulationSetup s;
  s.basis.dim = 2;
  s.basis.modes = n;
  s.basis.grid = 3 * n;
  s.model = ConstitutiveModel::newtonian(0.05, 0.0);
  s.noise.K = noisy ? 4 : 0;
  s.noise.alpha = 0.25;
  s.noise.amplitude = noisy ? 0.5 : 0.0;
  s.solver.dt = 1e-3;
  s.solver.T = 0.05;
  s.initial.rho_low = 0.8;
  s.initial.rho_high = 1.2;
  s.initial.velocity_norm = 0.5;
  s.initial.norm_law = VelocityNormLaw::Fixed;
  return s;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("equilibrium is a fixed point of both levels") {
  auto setup = small_setup(4, false);
  const Basis b = build_basis(setup.basis);
  SolverState s;
  s.rho.assign(b.grid_size(), 1.0);
  s.c.c.assign(b.coef_size(), 0.0);
  SolverParams reg = setup.solver;
  reg.level = SolverLevel::Regularized;
  reg.mu = 0.1;
  reg.epsilon = 0.05;
  reg.R = 2.0;
  const auto a = step_regularized(s, reg, setup.model, setup.noise, b);
  const auto c = step_base(s, setup.solver, setup.model, setup.noise, b);
  CHECK(max_diff(a.rho, s.rho) <= 1e-14);
  CHECK(max_diff(a.c.c, s.c.c) <= 1e-14);
  CHECK(max_diff(c.rho, s.rho) <= 1e-14);
  CHECK(max_diff(c.c.c, s.c.c) <= 1e-14);
  CHECK(a.t == doctest::Approx(1e-3));
}

TEST_CASE("single step matches the dense brute-force stepper at d = 1, n = 3") {
  for (int model_id = 0; model_id < 2; ++model_id) {
    BasisConfig cfg;
    cfg.dim = 1;
    cfg.modes = 3;
    cfg.grid = 9;
    const Basis b = build_basis(cfg);
    const ConstitutiveModel model =
        model_id == 0 ? ConstitutiveModel::power_law(3.0, 0.1) : ConstitutiveModel::newtonian(0.1, 0.05);
    NoiseModel noise;
    noise.K = 3;
    noise.alpha = 0.25;
    noise.amplitude = 0.7;
    SolverParams P;
    P.level = SolverLevel::Regularized;
    P.mu = 1e-4;
    P.epsilon = 0.02;
    P.dt = 2e-3;
    SolverState s;
    s.key = RngKey{99, 4};
    s.step = 17;
    s.rho.resize(9);
    for (int j = 0; j < 9; ++j) s.rho[j] = 1.0 + 0.2 * std::cos(0.7 + 1.3 * j);
    s.c.c = {0.8, -0.5, 0.3};
    P.R = coef_norm(s.c) - 0.4;  // inside the cutoff blend

    const auto lib = step_regularized(s, P, model, noise, b);
    oracle::Dense1d D;
    D.n = 3;
    D.N = 9;
    oracle::Params op{P.dt, P.mu, P.epsilon, P.R};
    const auto ref = oracle::step(D, {s.rho, s.c.c}, op, model, noise, s.key, s.step);
    CHECK(max_diff(lib.rho, ref.rho) < 1e-10);
    CHECK(max_diff(lib.c.c, ref.c) < 1e-10);
  }
}

TEST_CASE("mass is conserved over 100 noisy regularized steps") {
  for (BasisFamily fam : {BasisFamily::Sine, BasisFamily::Fourier}) {
    auto setup = small_setup(8, true);
    setup.basis.family = fam;
    setup.solver.level = SolverLevel::Regularized;
    setup.solver.epsilon = 0.01;
    setup.solver.mu = 1e-5;
    setup.solver.R = 5.0;
    setup.solver.T = 0.1;
    const auto tr = solve_path(setup, 7);
    REQUIRE_FALSE(tr.failure.has_value());
    REQUIRE(tr.ledger.rows.size() == 101);
    const double m0 = tr.ledger.rows.front().mass;
    for (const auto& r : tr.ledger.rows) {
      CHECK(std::abs(r.mass - m0) <= 1e-12 * std::max(r.t, 1e-3));
      CHECK(r.min_rho > 0.0);
    }
  }
}

TEST_CASE("base level equals regularized level with inert cutoffs") {
  auto setup = small_setup(6, true);
  const Basis b = build_basis(setup.basis);
  const auto profiles = noise_profiles(b, setup.noise.K);
  SolverState s = sample_initial_data(setup.initial, b, RngKey{5, 1});
  SolverParams reg = setup.solver;
  reg.level = SolverLevel::Regularized;
  reg.R = 1e300;
  StepOptions opt;
  opt.profiles = &profiles;
  const auto a = step_base(s, setup.solver, setup.model, setup.noise, b, opt);
  const auto c = step_regularized(s, reg, setup.model, setup.noise, b, opt);
  CHECK(a.rho == c.rho);
  CHECK(a.c.c == c.c.c);

  // whole paths, cutoff level never reached
  auto rs = setup;
  rs.solver.level = SolverLevel::Regularized;
  rs.solver.R = 50.0;
  const auto ta = solve_path(setup, 11);
  const auto tb = solve_path(rs, 11);
  REQUIRE(ta.checkpoints.size() == tb.checkpoints.size());
  for (std::size_t i = 0; i < ta.checkpoints.size(); ++i) {
    CHECK(ta.checkpoints[i].state.rho == tb.checkpoints[i].state.rho);
    CHECK(ta.checkpoints[i].state.c.c == tb.checkpoints[i].state.c.c);
  }
}

TEST_CASE("stopping time update and nesting") {
  auto setup = small_setup(4, false);
  const Basis b = build_basis(setup.basis);
  SolverState s;
  s.t = 0.3;
  s.rho.assign(b.grid_size(), 1.0);
  s.c.c.assign(b.coef_size(), 0.0);
  s.c.c[0] = 1.0;
  CHECK_FALSE(stopping_time_update(s, 2.0).stopped);
  const auto st = stopping_time_update(s, 0.5);
  CHECK(st.stopped);
  CHECK(st.tau == 0.3);

  auto noisy = small_setup(6, true);
  noisy.noise.amplitude = 4.0;
  noisy.solver.T = 0.1;
  noisy.initial.velocity_norm = 0.6;
  double prev_tau = 0.0;
  for (double guard : {0.62, 0.7, 0.9, 1e9}) {
    noisy.solver.guard = guard;
    const auto tr = solve_path(noisy, 3);
    REQUIRE_FALSE(tr.failure.has_value());
    CHECK(tr.tau >= prev_tau);
    prev_tau = tr.tau;
    if (tr.stopped) {
      // frozen after tau
      const auto& last = tr.checkpoints.back().state;
      CHECK(coef_norm(last.c) > guard);
    }
  }
}

TEST_CASE("mass solves: scalings, dense oracle, CG agreement") {
  auto setup = small_setup(4, false);
  const Basis b = build_basis(setup.basis);
  std::mt19937_64 g(4);
  std::normal_distribution<double> nd;
  ModalVector rhs;
  for (std::size_t i = 0; i < b.coef_size(); ++i) rhs.c.push_back(nd(g));

  GridScalar one(b.grid_size(), 1.0), two(b.grid_size(), 2.0);
  CHECK(max_diff(assemble_mass_solve(b, one, rhs).c, rhs.c) < 1e-13);
  auto half = rhs;
  for (double& v : half.c) v *= 0.5;
  CHECK(max_diff(assemble_mass_solve(b, two, rhs).c, half.c) < 1e-13);
  CHECK(max_diff(mass_solve_cg(b, two, rhs).c, half.c) < 1e-12);

  GridScalar rho(b.grid_size());
  std::uniform_real_distribution<double> ud(0.5, 1.5);
  for (double& v : rho) v = ud(g);
  std::vector<double> shift(b.coef_size());
  for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = 0.01 * b.trilaplace_eigen()[i % b.scalar_modes()] * 1e-6;
  const auto dense = assemble_mass_solve(b, rho, rhs, &shift);
  const auto cg = mass_solve_cg(b, rho, rhs, &shift);
  CHECK(max_diff(dense.c, cg.c) < 1e-10);
  CHECK(max_diff(mass_apply(b, rho, dense, &shift).c, rhs.c) < 1e-10);

  // d = 1, n = 4 brute-force Gram matrix
  BasisConfig c1;
  c1.dim = 1;
  c1.modes = 4;
  c1.grid = 11;
  const Basis b1 = build_basis(c1);
  oracle::Dense1d D;
  D.n = 4;
  D.N = 11;
  GridScalar r1(11);
  for (double& v : r1) v = ud(g);
  ModalVector q;
  for (int i = 0; i < 4; ++i) q.c.push_back(nd(g));
  oracle::Mat M(4, oracle::Vec(4, 0.0));
  for (int i = 1; i <= 4; ++i)
    for (int k = 1; k <= 4; ++k)
      for (int j = 0; j < 11; ++j) M[i - 1][k - 1] += D.h() * r1[j] * D.w(i, D.x(j)) * D.w(k, D.x(j));
  CHECK(max_diff(assemble_mass_solve(b1, r1, q).c, oracle::gauss_solve(M, q.c)) < 1e-10);

  GridScalar neg(b.grid_size(), -1.0);
  CHECK_THROWS_WITH_AS(assemble_mass_solve(b, neg, rhs), doctest::Contains("pivot"), Error);
  try {
    (void)mass_solve_cg(b, neg, rhs);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositiveDefinite);
  }
}

TEST_CASE("initial data law") {
  auto setup = small_setup(8, false);
  const Basis b = build_basis(setup.basis);
  InitialLaw flat;
  const auto s0 = sample_initial_data(flat, b, RngKey{1, 0});
  for (double v : s0.rho) CHECK(v == 1.0);
  for (double v : s0.c.c) CHECK(v == 0.0);

  InitialLaw law = setup.initial;
  law.norm_law = VelocityNormLaw::Uniform;
  law.velocity_norm = 2.0;
  for (std::uint32_t p = 0; p < 100; ++p) {
    const auto s = sample_initial_data(law, b, RngKey{17, p});
    const auto [lo, hi] = std::minmax_element(s.rho.begin(), s.rho.end());
    CHECK(*lo >= law.rho_low - 1e-14);
    CHECK(*hi <= law.rho_high + 1e-14);
    CHECK(coef_norm(s.c) <= 2.0 + 1e-12);
  }

  // energy against direct pointwise evaluation of the sampled fields
  const auto s = sample_initial_data(setup.initial, b, RngKey{17, 3});
  const auto row = evaluate_row(b, setup.model, setup.noise, setup.solver, s);
  double ke = 0.0, pot = 0.0;
  const std::size_t m = b.scalar_modes();
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    const auto gi = b.grid_index(i);
    double u2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      double ua = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const auto mi = b.mode_index(k);
        ua += s.c.c[a * m + k] * b.mode_value(0, mi[0], b.coordinate(0, gi[0])) *
              b.mode_value(1, mi[1], b.coordinate(1, gi[1]));
      }
      u2 += ua * ua;
    }
    const double r = s.rho[i];
    ke += 0.5 * r * u2 * b.cell_volume();
    pot += (r * r - r) * b.cell_volume();  // a = 1, gamma = 2
  }
  CHECK(std::isfinite(row.kinetic));
  CHECK(std::abs(row.kinetic - ke) < 1e-10);
  CHECK(std::abs(row.potential - pot) < 1e-10);
}

TEST_CASE("velocity cutoff") {
  ModalVector c{{3.0, 4.0}};  // norm 5
  CHECK(velocity_cutoff(c, 10.0).c == c.c);
  for (double v : velocity_cutoff(c, 3.0).c) CHECK(v == 0.0);
  std::mt19937_64 g(2);
  std::normal_distribution<double> nd;
  double lip = 0.0;
  const double R = 2.0;
  for (int i = 0; i < 2000; ++i) {
    ModalVector a{{nd(g), nd(g), nd(g)}};
    ModalVector b = a;
    for (double& v : b.c) v += 1e-4 * nd(g);
    const auto ca = velocity_cutoff(a, R), cb = velocity_cutoff(b, R);
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 3; ++k) {
      num += std::pow(ca.c[k] - cb.c[k], 2);
      den += std::pow(a.c[k] - b.c[k], 2);
    }
    lip = std::max(lip, std::sqrt(num / den));
    CHECK(coef_norm(ca) <= R + 1.0 + 1e-12);
  }
  CHECK(lip < 6.0);
  // no jump across |u| = R
  ModalVector below{{R - 1e-9, 0.0}}, above{{R + 1e-9, 0.0}};
  CHECK(std::abs(velocity_cutoff(below, R).c[0] - velocity_cutoff(above, R).c[0]) < 1e-8);
}

TEST_CASE("deterministic self-convergence under dt halving") {
  auto setup = small_setup(8, false);
  setup.solver.T = 0.1;
  std::vector<SolverState> finals;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    setup.solver.dt = dt;
    setup.solver.checkpoints = 1;
    const auto tr = solve_path(setup, 21);
    REQUIRE_FALSE(tr.failure.has_value());
    finals.push_back(tr.checkpoints.back().state);
  }
  auto dist = [](const SolverState& a, const SolverState& b) {
    return std::max(max_diff(a.rho, b.rho), max_diff(a.c.c, b.c.c));
  };
  const double e1 = dist(finals[0], finals[1]);
  const double e2 = dist(finals[1], finals[2]);
  MESSAGE("self-convergence ratio " << e1 / e2);
  CHECK(e1 / e2 >= 1.5);
  CHECK(e1 / e2 <= 2.5);
}

TEST_CASE("determinism and seed sensitivity") {
  auto setup = small_setup(6, true);
  setup.solver.T = 0.02;
  const auto a = solve_path(setup, 8, 2);
  const auto b = solve_path(setup, 8, 2);
  const auto c = solve_path(setup, 9, 2);
  CHECK(a.checkpoints.back().state.c.c == b.checkpoints.back().state.c.c);
  CHECK(a.checkpoints.back().state.rho == b.checkpoints.back().state.rho);
  CHECK(a.checkpoints.back().state.c.c != c.checkpoints.back().state.c.c);
}

TEST_CASE("equilibrium path is constant and ledger is consistent") {
  auto setup = small_setup(6, false);
  setup.initial = InitialLaw{};
  const auto tr = solve_path(setup, 1);
  REQUIRE(tr.checkpoints.size() == 6);
  for (const auto& cp : tr.checkpoints) {
    for (double v : cp.state.rho) CHECK(std::abs(v - 1.0) <= 1e-14);
    for (double v : cp.state.c.c) CHECK(std::abs(v) <= 1e-14);
  }
  CHECK(tr.ledger.rows.back().t == doctest::Approx(setup.solver.T));

  auto pl = small_setup(6, true);
  pl.model = ConstitutiveModel::power_law(3.0, 0.05);
  const auto tp = solve_path(pl, 4);
  REQUIRE_FALSE(tp.failure.has_value());
  for (const auto& r : tp.ledger.rows) {
    const double split = r.dissipation_F + r.dissipation_Fstar;
    CHECK(std::abs(split - r.stress_power) <= 1e-8 * std::max(1e-12, std::abs(r.stress_power)) + 1e-15);
    CHECK(r.ito_correction >= 0.0);
  }
}

TEST_CASE("step errors are diagnosable") {
  auto setup = small_setup(6, false);
  setup.initial.velocity_norm = 40.0;
  setup.solver.dt = 1e-2;
  const auto tr = solve_path(setup, 1);
  REQUIRE(tr.failure.has_value());
  CHECK(tr.failure->find("CFL") != std::string::npos);

  const Basis b = build_basis(setup.basis);
  auto s = sample_initial_data(setup.initial, b, RngKey{1, 0});
  SolverParams P = setup.solver;
  P.cfl_safety = 1e9;
  P.dt = 0.05;
  try {
    (void)step_base(s, P, setup.model, setup.noise, b);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PositivityLost);
  }

  CHECK(checkpoint_steps(10, 5) == std::vector<std::uint32_t>{0, 2, 4, 6, 8, 10});
  CHECK(checkpoint_steps(3, 5) == std::vector<std::uint32_t>{0, 1, 2, 3});
}
