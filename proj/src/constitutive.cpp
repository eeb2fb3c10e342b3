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
#include "stochflow/constitutive.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "stochflow/error.hpp"

namespace stochflow {

SymTensor SymTensor::identity(int d) {
  SymTensor t(d);
  for (int i = 0; i < d; ++i) t(i, i) = 1.0;
  return t;
}

double contract(const SymTensor& a, const SymTensor& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) s += a(i, j) * b(i, j);
  return s;
}

double norm2(const SymTensor& a) { return contract(a, a); }

double trace(const SymTensor& a) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += a(i, i);
  return s;
}

SymTensor operator+(const SymTensor& a, const SymTensor& b) {
  SymTensor r(a.dim);
  for (std::size_t k = 0; k < 9; ++k) r.v[k] = a.v[k] + b.v[k];
  return r;
}

SymTensor operator-(const SymTensor& a, const SymTensor& b) {
  SymTensor r(a.dim);
  for (std::size_t k = 0; k < 9; ++k) r.v[k] = a.v[k] - b.v[k];
  return r;
}

SymTensor operator*(double s, const SymTensor& a) {
  SymTensor r(a.dim);
  for (std::size_t k = 0; k < 9; ++k) r.v[k] = s * a.v[k];
  return r;
}

ConstitutiveModel ConstitutiveModel::power_law(double p, double viscosity, double a, double gamma) {
  ConstitutiveModel m;
  m.family = PotentialFamily::PowerLaw;
  m.p = p;
  m.viscosity = viscosity;
  m.pressure_a = a;
  m.pressure_gamma = gamma;
  return m;
}

ConstitutiveModel ConstitutiveModel::newtonian(double mu, double lambda, double a, double gamma) {
  ConstitutiveModel m;
  m.family = PotentialFamily::Newtonian;
  m.mu = mu;
  m.lambda = lambda;
  m.pressure_a = a;
  m.pressure_gamma = gamma;
  return m;
}

void ConstitutiveModel::validate() const {
  std::ostringstream why;
  if (family == PotentialFamily::PowerLaw) {
    if (!(p > 1.0)) why << "model.p must be > 1; ";
    if (!(viscosity > 0.0)) why << "model.viscosity must be > 0; ";
  } else {
    if (!(mu > 0.0)) why << "model.mu must be > 0; ";
    if (!(lambda >= 0.0)) why << "model.lambda must be >= 0; ";
  }
  if (!(pressure_a > 0.0)) why << "model.pressure_a must be > 0; ";
  if (!(pressure_gamma > 1.0)) why << "model.pressure_gamma must be > 1; ";
  if (!why.str().empty()) fail(ErrorCode::ConfigInvalid, why.str());
}

double radial_potential(const ConstitutiveModel& m, double t) {
  return m.viscosity / m.p * std::expm1(0.5 * m.p * std::log1p(t * t));
}

double radial_derivative(const ConstitutiveModel& m, double t) {
  return m.viscosity * std::pow(1.0 + t * t, 0.5 * (m.p - 2.0)) * t;
}

double radial_second_derivative(const ConstitutiveModel& m, double t) {
  const double s = 1.0 + t * t;
  return m.viscosity * std::pow(s, 0.5 * (m.p - 4.0)) * (1.0 + (m.p - 1.0) * t * t);
}

double potential_value(const ConstitutiveModel& m, const SymTensor& D) {
  if (m.family == PotentialFamily::Newtonian) {
    const double tr = trace(D);
    return 0.5 * m.mu * norm2(D) + 0.5 * m.lambda * tr * tr;
  }
  return radial_potential(m, std::sqrt(norm2(D)));
}

SymTensor stress_of_strain(const ConstitutiveModel& m, const SymTensor& D) {
  if (m.family == PotentialFamily::Newtonian) {
    SymTensor S = m.mu * D;
    const double tr = trace(D);
    for (int i = 0; i < D.dim; ++i) S(i, i) += m.lambda * tr;
    return S;
  }
  const double factor = m.viscosity * std::pow(1.0 + norm2(D), 0.5 * (m.p - 2.0));
  return factor * D;
}

double radial_conjugate(const ConstitutiveModel& m, double s, double* argmax,
                        const ConjugateOptions& opt) {
  if (s <= 0.0) {
    if (argmax) *argmax = 0.0;
    return 0.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (radial_derivative(m, hi) < s) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > opt.max_doublings || !std::isfinite(hi))
      fail(ErrorCode::MaximizerNotBracketed,
           "radial conjugate: no sign change of f'(t) - s below t = " + std::to_string(hi));
  }
  double t = std::min(std::max(s / m.viscosity, lo), hi);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double g = radial_derivative(m, t) - s;
    if (std::abs(g) <= opt.tol * s) break;
    if (g > 0.0)
      hi = t;
    else
      lo = t;
    double next = t - g / radial_second_derivative(m, t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      t = next;
      break;
    }
    t = next;
  }
  if (argmax) *argmax = t;
  return s * t - radial_potential(m, t);
}

double conjugate_value(const ConstitutiveModel& m, const SymTensor& S, const ConjugateOptions& opt) {
  if (m.family == PotentialFamily::Newtonian) {
    const int d = S.dim;
    const double tr = trace(S);
    const double dev2 = norm2(S) - tr * tr / d;
    return 0.5 * dev2 / m.mu + tr * tr / (2.0 * d * (m.mu + d * m.lambda));
  }
  return radial_conjugate(m, std::sqrt(norm2(S)), nullptr, opt);
}

double fenchel_gap(const ConstitutiveModel& m, const SymTensor& S, const SymTensor& D) {
  return potential_value(m, D) + conjugate_value(m, S) - contract(S, D);
}

namespace {
void require_nonnegative(double rho) {
  if (rho < 0.0) fail(ErrorCode::NegativeDensity, "density " + std::to_string(rho) + " < 0");
}
void require_positive(double rho) {
  if (!(rho > 0.0)) fail(ErrorCode::NegativeDensity, "density " + std::to_string(rho) + " <= 0");
}
}  // namespace

double pressure_value(const ConstitutiveModel& m, double rho) {
  require_nonnegative(rho);
  return m.pressure_a * std::pow(rho, m.pressure_gamma);
}

double pressure_derivative(const ConstitutiveModel& m, double rho) {
  require_nonnegative(rho);
  return m.pressure_a * m.pressure_gamma * std::pow(rho, m.pressure_gamma - 1.0);
}

double pressure_potential(const ConstitutiveModel& m, double rho) {
  require_positive(rho);
  return m.pressure_a * (std::pow(rho, m.pressure_gamma) - rho) / (m.pressure_gamma - 1.0);
}

double pressure_enthalpy(const ConstitutiveModel& m, double rho) {
  require_positive(rho);
  const double g = m.pressure_gamma;
  return m.pressure_a * (g * std::pow(rho, g - 1.0) - 1.0) / (g - 1.0);
}

double pressure_potential_second(const ConstitutiveModel& m, double rho) {
  require_positive(rho);
  return m.pressure_a * m.pressure_gamma * std::pow(rho, m.pressure_gamma - 2.0);
}

double envelope(const ConstitutiveModel& m, double t) {
  if (m.family == PotentialFamily::Newtonian) return 0.5 * m.mu * t * t;
  return radial_potential(m, t);
}

EnvelopeReport envelope_check(const ConstitutiveModel& m, const std::vector<SymTensor>& samples) {
  EnvelopeReport rep;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = envelope(m, std::sqrt(norm2(samples[i]))) - potential_value(m, samples[i]);
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_index = i;
    }
  }
  rep.pass = rep.max_violation <= 1e-12;
  return rep;
}

}  // namespace stochflow
