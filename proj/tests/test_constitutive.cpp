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

#include "stochflow/constitutive.hpp"
#include "stochflow/error.hpp"
#include "test_util.hpp"

using namespace stochflow;

TEST_CASE("potential values") {
  const auto newt = ConstitutiveModel::newtonian(1.0);
  CHECK(potential_value(newt, SymTensor::identity(3)) == doctest::Approx(1.5));

  const auto p3 = ConstitutiveModel::power_law(3.0);
  SymTensor D(3);
  D(0, 0) = 1.0;
  D(1, 1) = 1.0;
  D(2, 2) = -1.0;  // |D|^2 = 3
  CHECK(potential_value(p3, D) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));

  std::mt19937_64 g(11);
  const auto p2 = ConstitutiveModel::power_law(2.0);
  for (int i = 0; i < 20; ++i) {
    const SymTensor E = testutil::random_sym(g, 3, 2.0);
    CHECK(potential_value(p2, E) == doctest::Approx(potential_value(newt, E)).epsilon(1e-13));
  }
  CHECK(potential_value(p3, SymTensor(2)) == 0.0);
  CHECK(potential_value(newt, SymTensor(2)) == 0.0);
}

TEST_CASE("stress is the gradient of the potential") {
  std::mt19937_64 g(12);
  CHECK(norm2(stress_of_strain(ConstitutiveModel::power_law(3.0), SymTensor(3))) == 0.0);
  const auto p2 = ConstitutiveModel::power_law(2.0);
  const SymTensor D = testutil::random_sym(g, 3, 1.5);
  CHECK(norm2(stress_of_strain(p2, D) - D) < 1e-28);

  for (const auto& m : testutil::model_zoo()) {
    for (int trial = 0; trial < 20; ++trial) {
      const SymTensor D = testutil::random_sym(g, 3, 2.0);
      const SymTensor S = stress_of_strain(m, D);
      const SymTensor fd = testutil::fd_gradient(m, D, 1e-5);
      CHECK(std::sqrt(norm2(S - fd)) <= 1e-6 * std::max(1.0, std::sqrt(norm2(S))));
    }
  }
}

TEST_CASE("conjugate values") {
  std::mt19937_64 g(13);
  CHECK(conjugate_value(ConstitutiveModel::power_law(3.0), SymTensor(3)) == 0.0);

  // Newtonian mu=2, |S|^2 = 8 -> 2; cross-check with golden-section on s t - mu t^2/2
  const auto n2 = ConstitutiveModel::newtonian(2.0);
  SymTensor S(2);
  S(0, 1) = S(1, 0) = 2.0;  // |S|^2 = 8
  CHECK(conjugate_value(n2, S) == doctest::Approx(2.0).epsilon(1e-14));
  const double golden = testutil::golden_max([](double t) { return std::sqrt(8.0) * t - t * t; }, 0.0, 10.0);
  CHECK(golden == doctest::Approx(2.0).epsilon(1e-9));

  // power law p=3 against a dense radial grid search
  const auto p3 = ConstitutiveModel::power_law(3.0);
  for (int i = 0; i < 10; ++i) {
    const SymTensor T = testutil::random_sym(g, 3, 3.0);
    const double s = std::sqrt(norm2(T));
    const double brute = testutil::grid_max(
        [&](double t) { return s * t - radial_potential(p3, t); }, 0.0, s + 2.0, 200000);
    CHECK(conjugate_value(p3, T) == doctest::Approx(brute).epsilon(1e-6));
  }

  // Newtonian with lambda > 0 against brute maximisation over symmetric D
  const auto nl = ConstitutiveModel::newtonian(1.3, 0.7);
  const SymTensor T = testutil::random_sym(g, 2, 1.0);
  const double closed = conjugate_value(nl, T);
  CHECK(closed == doctest::Approx(testutil::brute_conjugate_quadratic(nl, T)).epsilon(1e-10));
}

TEST_CASE("Fenchel gap") {
  std::mt19937_64 g(14);
  for (const auto& m : testutil::model_zoo()) {
    for (int i = 0; i < 50; ++i) {
      const SymTensor D = testutil::random_sym(g, 3, 2.0);
      CHECK(fenchel_gap(m, stress_of_strain(m, D), D) <= 1e-10);
      CHECK(fenchel_gap(m, stress_of_strain(m, D), D) >= -1e-10);
      const SymTensor S = testutil::random_sym(g, 3, 2.0);
      CHECK(fenchel_gap(m, S, D) >= -1e-12);
    }
  }
  const auto p15 = ConstitutiveModel::power_law(1.5);
  SymTensor D(3);
  D(0, 0) = std::sqrt(2.0);
  D(1, 1) = -std::sqrt(2.0);  // |D| = 2
  CHECK(std::abs(fenchel_gap(p15, stress_of_strain(p15, D), D)) < 1e-8);
}

TEST_CASE("stress monotonicity") {
  std::mt19937_64 g(15);
  for (const auto& m : testutil::model_zoo())
    for (int i = 0; i < 50; ++i) {
      const SymTensor A = testutil::random_sym(g, 3, 2.0), B = testutil::random_sym(g, 3, 2.0);
      CHECK(contract(stress_of_strain(m, A) - stress_of_strain(m, B), A - B) >= -1e-12);
    }
}

TEST_CASE("pressure law") {
  const auto m = ConstitutiveModel::newtonian(1.0, 0.0, 1.0, 2.0);
  CHECK(pressure_value(m, 0.0) == 0.0);
  CHECK(pressure_value(m, 3.0) == doctest::Approx(9.0));
  CHECK_THROWS_AS(pressure_value(m, -1.0), Error);
  CHECK(pressure_potential(m, 1.0) == 0.0);
  CHECK(pressure_potential(m, 2.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(pressure_potential(m, 0.0), Error);

  std::mt19937_64 g(16);
  std::uniform_real_distribution<double> ur(0.05, 5.0);
  const auto m2 = ConstitutiveModel::power_law(3.0, 1.0, 0.7, 1.4);
  for (int i = 0; i < 50; ++i) {
    const double r1 = ur(g), r2 = r1 + ur(g);
    CHECK(pressure_value(m2, r2) > pressure_value(m2, r1));
    // P(rho) = rho * int_1^rho p(z)/z^2 dz by Simpson quadrature
    const double q = testutil::simpson([&](double z) { return pressure_value(m2, z) / (z * z); }, 1.0, r1, 2000);
    CHECK(pressure_potential(m2, r1) == doctest::Approx(r1 * q).epsilon(1e-9));
    // rho P'' = p' by finite differences
    const double h = 1e-4 * r1;
    const double P2 = (pressure_potential(m2, r1 + h) - 2 * pressure_potential(m2, r1) +
                       pressure_potential(m2, r1 - h)) / (h * h);
    const double p1 = (pressure_value(m2, r1 + h) - pressure_value(m2, r1 - h)) / (2 * h);
    CHECK(r1 * P2 == doctest::Approx(p1).epsilon(1e-6));
    CHECK(P2 > 0.0);
  }
}

TEST_CASE("envelope") {
  std::mt19937_64 g(17);
  std::vector<SymTensor> cloud;
  for (int i = 0; i < 200; ++i) cloud.push_back(testutil::random_sym(g, 3, 3.0));
  const auto p3 = ConstitutiveModel::power_law(3.0);
  CHECK(envelope_check(p3, cloud).max_violation == 0.0);
  CHECK(envelope_check(ConstitutiveModel::newtonian(1.0), cloud).max_violation <= 1e-12);
  CHECK(envelope_check(ConstitutiveModel::newtonian(1.0, 2.0), cloud).pass);

  for (const auto& m : testutil::model_zoo()) {
    CHECK(envelope(m, 0.0) == 0.0);
    double prev_ratio = 0.0;
    for (double t = 1.0; t <= 1e6; t *= 1.5) {
      const double r = envelope(m, t) / t;
      CHECK(r > prev_ratio);
      prev_ratio = r;
      const double h = 1e-3 * t;
      CHECK(envelope(m, t + h) - 2 * envelope(m, t) + envelope(m, t - h) >= -1e-9 * envelope(m, t));
    }
  }
}

TEST_CASE("unbracketable conjugate is reported") {
  ConjugateOptions opt;
  opt.max_doublings = 3;
  CHECK_THROWS_AS(radial_conjugate(ConstitutiveModel::power_law(1.5), 1e6, nullptr, opt), Error);
}
