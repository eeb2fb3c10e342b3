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
#include "stochflow/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "stochflow/error.hpp"

namespace stochflow {

double NoiseModel::sum_f2() const {
  double s = 0.0;
  for (int k = 1; k <= K; ++k) s += f(k) * f(k);
  return s;
}

void NoiseModel::validate() const {
  std::ostringstream why;
  if (K < 0) why << "noise.modes must be >= 0; ";
  if (!(alpha > 0.0 && alpha < 1.0)) why << "noise.alpha must lie in (0,1); ";
  if (alpha > 0.0 && speed_cutoff_lipschitz(alpha) > 1.0)
    why << "noise.alpha > 1/3 makes the speed cutoff steeper than 1; ";
  if (!(amplitude >= 0.0)) why << "noise.amplitude must be >= 0; ";
  if (!why.str().empty()) fail(ErrorCode::ConfigInvalid, why.str());
}

double smoothstep(double z) {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  return z * z * (3.0 - 2.0 * z);
}

double density_cutoff(double alpha, double rho) {
  const double up = smoothstep((rho - alpha) / alpha);
  const double top = 1.0 / (2.0 * alpha);
  const double down = 1.0 - smoothstep((rho - top) / top);
  return up * down;
}

double speed_cutoff(double alpha, double s) {
  const double start = 1.0 / (2.0 * alpha);
  return 1.0 - smoothstep((s - start) / start);
}

double speed_cutoff_lipschitz(double alpha) { return 3.0 * alpha; }

GridVector noise_profile(const Basis& b, int k) {
  const int d = b.dim();
  const int dir = (k - 1) % d;
  const int level = (k - 1) / d;
  GridVector out;
  out.dim = d;
  out.comp.assign(static_cast<std::size_t>(d), GridScalar(b.grid_size(), 0.0));
  auto& f = out.comp[static_cast<std::size_t>(dir)];
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    const auto idx = b.grid_index(i);
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
      const double x = b.coordinate(a, idx[static_cast<std::size_t>(a)]);
      const double L = b.config().length[static_cast<std::size_t>(a)];
      if (b.family() == BasisFamily::Sine) {
        const int m = a == 0 ? 1 + level : 1;
        v *= std::sin(m * std::numbers::pi * x / L);
      } else if (a == 0) {
        v *= std::cos(2.0 * std::numbers::pi * level * x / L);
      }
    }
    f[i] = v;
  }
  return out;
}

namespace {
GridScalar cutoff_factor(const Basis& b, const NoiseModel& m, const GridScalar& rho,
                         const GridVector& u) {
  check_grid(b, rho, "noise density");
  GridScalar s(b.grid_size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double speed2 = 0.0;
    for (int a = 0; a < b.dim(); ++a) speed2 += u.comp[static_cast<std::size_t>(a)][i] * u.comp[static_cast<std::size_t>(a)][i];
    s[i] = density_cutoff(m.alpha, rho[i]) * speed_cutoff(m.alpha, std::sqrt(speed2));
  }
  return s;
}
}  // namespace

GridVector forcing_field(const Basis& b, const NoiseModel& m, int k, const GridScalar& rho,
                         const GridVector& u) {
  GridVector F = noise_profile(b, k);
  const GridScalar s = cutoff_factor(b, m, rho, u);
  for (auto& comp : F.comp)
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= m.f(k) * s[i];
  return F;
}

GridVector diffusion_coefficient(const Basis& b, const NoiseModel& m, int k, const GridScalar& rho,
                                 const GridVector& u) {
  GridVector G = forcing_field(b, m, k, rho, u);
  for (auto& comp : G.comp)
    for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= rho[i];
  return G;
}

WienerIncrement sample_increments(const RngKey& key, std::uint32_t step, double dt, int K) {
  WienerIncrement w;
  w.dt = dt;
  w.dW.resize(static_cast<std::size_t>(K));
  const double sd = std::sqrt(dt);
  for (int k = 0; k < K; ++k)
    w.dW[static_cast<std::size_t>(k)] =
        sd * standard_normal(key, step, static_cast<std::uint32_t>(k), Stream::Wiener);
  return w;
}

std::vector<GridVector> noise_profiles(const Basis& b, int K) {
  std::vector<GridVector> out;
  for (int k = 1; k <= K; ++k) out.push_back(noise_profile(b, k));
  return out;
}

NoiseProjection project_noise(const Basis& b, const NoiseModel& m, const GridScalar& rho,
                              const GridVector& u, const std::vector<GridVector>* profiles) {
  NoiseProjection np;
  if (!m.active()) return np;
  const GridScalar s = cutoff_factor(b, m, rho, u);
  for (int k = 1; k <= m.K; ++k) {
    GridVector F = profiles ? (*profiles)[static_cast<std::size_t>(k - 1)] : noise_profile(b, k);
    for (auto& comp : F.comp)
      for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= m.f(k) * s[i];
    ModalVector pf = project(b, F);
    GridVector inner = synthesize(b, pf);
    for (auto& comp : inner.comp)
      for (std::size_t i = 0; i < comp.size(); ++i) comp[i] *= rho[i];
    np.weighted.push_back(project(b, inner));
    np.proj.push_back(std::move(pf));
  }
  return np;
}

ModalVector combine_increment(const NoiseProjection& np, const std::vector<double>& dW,
                              std::size_t size) {
  ModalVector out;
  out.c.assign(size, 0.0);
  for (std::size_t k = 0; k < np.weighted.size() && k < dW.size(); ++k)
    for (std::size_t i = 0; i < size; ++i) out.c[i] += np.weighted[k].c[i] * dW[k];
  return out;
}

ModalVector momentum_noise_increment(const Basis& b, const NoiseModel& m, const GridScalar& rho,
                                     const GridVector& u, const std::vector<double>& dW) {
  return combine_increment(project_noise(b, m, rho, u), dW, b.coef_size());
}

}  // namespace stochflow
