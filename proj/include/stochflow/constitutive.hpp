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
#include <cstddef>
#include <vector>

namespace stochflow {

// d x d tensor with full row-major storage (only the symmetric case is used).
struct SymTensor {
  int dim = 3;
  std::array<double, 9> v{};

  SymTensor() = default;
  explicit SymTensor(int d) : dim(d) {}

  double& operator()(int i, int j) { return v[static_cast<std::size_t>(3 * i + j)]; }
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(3 * i + j)]; }

  static SymTensor identity(int d);
};

double contract(const SymTensor& a, const SymTensor& b);
double norm2(const SymTensor& a);
double trace(const SymTensor& a);
SymTensor operator+(const SymTensor& a, const SymTensor& b);
SymTensor operator-(const SymTensor& a, const SymTensor& b);
SymTensor operator*(double s, const SymTensor& a);

enum class PotentialFamily { PowerLaw, Newtonian };

struct ConstitutiveModel {
  PotentialFamily family = PotentialFamily::Newtonian;
  double p = 2.0;          // power-law exponent
  double viscosity = 1.0;  // power-law prefactor nu
  double mu = 1.0;
  double lambda = 0.0;
  double pressure_a = 1.0;
  double pressure_gamma = 2.0;

  static ConstitutiveModel power_law(double p, double viscosity = 1.0, double a = 1.0,
                                     double gamma = 2.0);
  static ConstitutiveModel newtonian(double mu, double lambda = 0.0, double a = 1.0,
                                     double gamma = 2.0);
  void validate() const;
};

struct ConjugateOptions {
  double tol = 1e-12;
  int max_doublings = 1100;
  int max_iterations = 400;
};

double potential_value(const ConstitutiveModel& m, const SymTensor& D);
SymTensor stress_of_strain(const ConstitutiveModel& m, const SymTensor& D);
double conjugate_value(const ConstitutiveModel& m, const SymTensor& S,
                       const ConjugateOptions& opt = {});
double fenchel_gap(const ConstitutiveModel& m, const SymTensor& S, const SymTensor& D);

// Radial power-law profile f(t) = (nu/p)[(1+t^2)^{p/2} - 1] and its derivatives.
double radial_potential(const ConstitutiveModel& m, double t);
double radial_derivative(const ConstitutiveModel& m, double t);
double radial_second_derivative(const ConstitutiveModel& m, double t);
// sup_t (s t - f(t)) and its maximizer
double radial_conjugate(const ConstitutiveModel& m, double s, double* argmax = nullptr,
                        const ConjugateOptions& opt = {});

double pressure_value(const ConstitutiveModel& m, double rho);
double pressure_derivative(const ConstitutiveModel& m, double rho);  // p'(rho)
double pressure_potential(const ConstitutiveModel& m, double rho);   // P(rho)
double pressure_enthalpy(const ConstitutiveModel& m, double rho);    // P'(rho)
double pressure_potential_second(const ConstitutiveModel& m, double rho);  // P''(rho)

// Lower envelope N-function g of the family.
double envelope(const ConstitutiveModel& m, double t);

struct EnvelopeReport {
  double max_violation = 0.0;  // max over samples of g(|D|) - F(D); <= 0 means satisfied
  std::size_t worst_index = 0;
  bool pass = true;
};
EnvelopeReport envelope_check(const ConstitutiveModel& m, const std::vector<SymTensor>& samples);

}  // namespace stochflow
