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
#include <numbers>
#include <random>

#include "stochflow/error.hpp"
#include "stochflow/spectral_basis.hpp"

using namespace stochflow;

namespace {
constexpr double kPi = std::numbers::pi;

GridVector random_field(const Basis& b, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  GridVector f;
  f.dim = b.dim();
  for (int a = 0; a < b.dim(); ++a) {
    GridScalar s(b.grid_size());
    for (auto& x : s) x = nd(g);
    f.comp.push_back(s);
  }
  return f;
}

ModalVector random_coef(const Basis& b, std::mt19937_64& g) {
  std::normal_distribution<double> nd;
  ModalVector c;
  c.c.resize(b.coef_size());
  for (auto& x : c.c) x = nd(g);
  return c;
}

BasisConfig cfg(int d, BasisFamily fam, int n, int N, double L = 1.0) {
  BasisConfig c;
  c.dim = d;
  c.family = fam;
  c.modes = n;
  c.grid = N;
  c.length = {L, L * 1.3, L * 0.8};
  return c;
}
}  // namespace

TEST_CASE("single sine mode on [0, pi]") {
  BasisConfig c = cfg(1, BasisFamily::Sine, 1, 5, kPi);
  c.length[0] = kPi;
  const Basis b = build_basis(c);
  CHECK(b.trilaplace_eigen()[0] == doctest::Approx(1.0).epsilon(1e-14));
  ModalVector one{{1.0}};
  const auto u = synthesize(b, one);
  for (int j = 0; j < b.grid(); ++j) {
    const double x = b.coordinate(0, j);
    CHECK(u.comp[0][static_cast<std::size_t>(j)] == doctest::Approx(std::sqrt(2.0 / kPi) * std::sin(x)).epsilon(1e-14));
  }
  BasisConfig c6 = c;
  c6.modes = 6;
  c6.grid = 13;
  const Basis b6 = build_basis(c6);
  for (int k = 1; k <= 6; ++k) CHECK(b6.trilaplace_eigen()[static_cast<std::size_t>(k - 1)] == doctest::Approx(std::pow(k, 6)).epsilon(1e-13));
}

TEST_CASE("resolution below the dealiasing margin is rejected") {
  CHECK_THROWS_AS(build_basis(cfg(2, BasisFamily::Sine, 8, 16)), Error);
  try {
    build_basis(cfg(1, BasisFamily::Fourier, 8, 10));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ResolutionTooLow);
  }
}

TEST_CASE("orthonormality and projection properties") {
  std::mt19937_64 g(21);
  for (auto fam : {BasisFamily::Sine, BasisFamily::Fourier}) {
    for (int d : {1, 2}) {
      const Basis b = build_basis(cfg(d, fam, 8, 17));
      // Gram matrix of the scalar modes by quadrature
      const std::size_t m = b.scalar_modes();
      double worst = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> e(m, 0.0);
        e[i] = 1.0;
        const auto col = project_scalar(b, synthesize_scalar(b, e));
        for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(col[j] - (i == j ? 1.0 : 0.0)));
      }
      CHECK(worst < 1e-10);

      ModalVector e3;
      e3.c.assign(b.coef_size(), 0.0);
      e3.c[3] = 1.0;
      const auto p3 = project(b, synthesize(b, e3));
      for (std::size_t i = 0; i < p3.c.size(); ++i) CHECK(std::abs(p3.c[i] - (i == 3 ? 1.0 : 0.0)) < 1e-10);

      const GridVector f = random_field(b, g), h = random_field(b, g);
      const ModalVector pf = project(b, f);
      const ModalVector ppf = project(b, synthesize(b, pf));
      for (std::size_t i = 0; i < pf.c.size(); ++i) CHECK(std::abs(ppf.c[i] - pf.c[i]) < 1e-12);
      const double lhs = grid_inner(b, synthesize(b, pf), h);
      const double rhs = grid_inner(b, f, synthesize(b, project(b, h)));
      CHECK(std::abs(lhs - rhs) < 1e-10);
      CHECK(coef_norm(pf) <= std::sqrt(grid_inner(b, f, f)) + 1e-12);

      const ModalVector c = random_coef(b, g);
      const ModalVector back = project(b, synthesize(b, c));
      for (std::size_t i = 0; i < c.c.size(); ++i) CHECK(std::abs(back.c[i] - c.c[i]) < 1e-12);
      const auto u = synthesize(b, c);
      CHECK(std::sqrt(grid_inner(b, u, u)) == doctest::Approx(coef_norm(c)).epsilon(1e-10));

      ModalVector zero;
      zero.c.assign(b.coef_size(), 0.0);
      for (const auto& comp : synthesize(b, zero).comp)
        for (double v : comp) CHECK(v == 0.0);
      for (double v : divergence(b, zero)) CHECK(v == 0.0);
      for (double v : tri_laplacian(b, zero).c) CHECK(v == 0.0);
    }
  }
}

TEST_CASE("derivatives") {
  // d=1 sine mode k on [0, pi]: divergence = sqrt(2/pi) k cos(kx)
  BasisConfig c = cfg(1, BasisFamily::Sine, 5, 11, kPi);
  c.length[0] = kPi;
  const Basis b = build_basis(c);
  for (int k = 1; k <= 5; ++k) {
    ModalVector e;
    e.c.assign(5, 0.0);
    e.c[static_cast<std::size_t>(k - 1)] = 1.0;
    const auto div = divergence(b, e);
    for (int j = 0; j < b.grid(); ++j)
      CHECK(std::abs(div[static_cast<std::size_t>(j)] - std::sqrt(2.0 / kPi) * k * std::cos(k * b.coordinate(0, j))) < 1e-10);
  }
  std::mt19937_64 g(22);
  for (auto fam : {BasisFamily::Sine, BasisFamily::Fourier}) {
    const Basis b2 = build_basis(cfg(2, fam, 6, 13));
    const ModalVector cc = random_coef(b2, g);
    const auto D = std::get<GridTensor>(differentiate(b2, cc, DiffOp::SymGradient));
    const auto div = std::get<GridScalar>(differentiate(b2, cc, DiffOp::Divergence));
    for (std::size_t i = 0; i < div.size(); ++i) CHECK(std::abs(D.at(0, 0)[i] + D.at(1, 1)[i] - div[i]) < 1e-12);
    const auto tri = std::get<ModalVector>(differentiate(b2, cc, DiffOp::TriLaplacian));
    for (std::size_t i = 0; i < cc.c.size(); ++i)
      CHECK(tri.c[i] == -b2.trilaplace_eigen()[i % b2.scalar_modes()] * cc.c[i]);
  }
}

TEST_CASE("sine eigenvalues are exact k^6 in modal space") {
  const Basis b = build_basis(cfg(2, BasisFamily::Sine, 4, 9));
  for (std::size_t m = 0; m < b.scalar_modes(); ++m) {
    const auto idx = b.mode_index(m);
    const double k0 = (idx[0] + 1) * kPi / 1.0, k1 = (idx[1] + 1) * kPi / 1.3;
    CHECK(b.trilaplace_eigen()[m] == doctest::Approx(std::pow(k0 * k0 + k1 * k1, 3)).epsilon(1e-14));
  }
}

TEST_CASE("density operators: summation by parts, diffusion, mass") {
  std::mt19937_64 g(23);
  std::normal_distribution<double> nd;
  for (auto fam : {BasisFamily::Sine, BasisFamily::Fourier}) {
    const Basis b = build_basis(cfg(2, fam, 5, 12));
    GridScalar f(b.grid_size()), h(b.grid_size());
    for (auto& x : f) x = nd(g);
    for (auto& x : h) x = nd(g);
    for (int a = 0; a < 2; ++a) {
      const double l = grid_inner(b, density_derivative(b, f, a, Parity::Even), h);
      const double r = -grid_inner(b, f, density_derivative(b, h, a, Parity::Odd));
      CHECK(std::abs(l - r) < 1e-10);
      // derivatives of odd-type fields have zero mean
      CHECK(std::abs(grid_integral(b, density_derivative(b, f, a, Parity::Odd))) < 1e-12);
    }
    const GridScalar lap = density_laplacian(b, f);
    GridScalar composed(b.grid_size(), 0.0);
    for (int a = 0; a < 2; ++a) {
      const auto dd = density_derivative(b, density_derivative(b, f, a, Parity::Even), a, Parity::Odd);
      for (std::size_t i = 0; i < dd.size(); ++i) composed[i] += dd[i];
    }
    if (fam == BasisFamily::Sine)
      for (std::size_t i = 0; i < lap.size(); ++i) CHECK(std::abs(lap[i] - composed[i]) < 1e-8 * (1.0 + std::abs(lap[i])));
    const GridScalar sol = density_diffusion_solve(b, f, 0.01);
    const GridScalar lsol = density_laplacian(b, sol);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(sol[i] - 0.01 * lsol[i] - f[i]) < 1e-9);
    CHECK(grid_integral(b, sol) == doctest::Approx(grid_integral(b, f)).epsilon(1e-12));
  }
  // spectral derivative of a smooth even profile
  const Basis b = build_basis(cfg(1, BasisFamily::Sine, 8, 40));
  GridScalar f(b.grid_size());
  for (int j = 0; j < b.grid(); ++j) f[static_cast<std::size_t>(j)] = std::cos(3 * kPi * b.coordinate(0, j));
  const auto df = density_derivative(b, f, 0, Parity::Even);
  for (int j = 0; j < b.grid(); ++j)
    CHECK(std::abs(df[static_cast<std::size_t>(j)] + 3 * kPi * std::sin(3 * kPi * b.coordinate(0, j))) < 1e-10);
}

TEST_CASE("spectral decay on an analytic fixture") {
  const Basis b = build_basis(cfg(1, BasisFamily::Fourier, 21, 64));
  GridScalar f(b.grid_size());
  for (int j = 0; j < b.grid(); ++j) f[static_cast<std::size_t>(j)] = 1.0 / (1.2 - std::cos(2 * kPi * b.coordinate(0, j)));
  const auto c = project_scalar(b, f);
  // cosine coefficients at positions 1, 3, 5, ...
  for (int k = 3; k + 2 < 21; k += 2) CHECK(std::abs(c[static_cast<std::size_t>(k + 2)]) < std::abs(c[static_cast<std::size_t>(k)]));
}

TEST_CASE("shape errors") {
  const Basis b = build_basis(cfg(2, BasisFamily::Sine, 4, 9));
  ModalVector bad{{1.0, 2.0}};
  CHECK_THROWS_AS(synthesize(b, bad), Error);
  GridScalar g(5);
  CHECK_THROWS_AS(project_scalar(b, g), Error);
}
