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

#include <cstdint>
#include <vector>

#include "stochflow/rng.hpp"
#include "stochflow/spectral_basis.hpp"

namespace stochflow {

struct NoiseModel {
  int K = 0;
  double alpha = 0.25;
  double amplitude = 0.0;  // f-bar; f_k = amplitude / k

  double f(int k) const { return amplitude / k; }  // k is 1-based
  double tail_bound() const { return K > 0 ? amplitude * amplitude / K : 0.0; }
  double sum_f2() const;
  bool active() const { return K > 0 && amplitude != 0.0; }
  void validate() const;
};

double smoothstep(double z);
// psi_alpha: 1 on [2a, 1/(2a)], 0 outside [a, 1/a]
double density_cutoff(double alpha, double rho);
// phi_alpha: 1 on [0, 1/(2a)], 0 beyond 1/a
double speed_cutoff(double alpha, double s);
double speed_cutoff_lipschitz(double alpha);

// b_k, k = 1..K, sup norm 1
GridVector noise_profile(const Basis& b, int k);
// F_k(x, rho, u) and G_k = rho F_k on the grid
GridVector forcing_field(const Basis& b, const NoiseModel& m, int k, const GridScalar& rho,
                         const GridVector& u);
GridVector diffusion_coefficient(const Basis& b, const NoiseModel& m, int k, const GridScalar& rho,
                                 const GridVector& u);

struct WienerIncrement {
  double dt = 0.0;
  std::vector<double> dW;
};
WienerIncrement sample_increments(const RngKey& key, std::uint32_t step, double dt, int K);

// Per-mode projections: proj[k] = Pi_n F_k, weighted[k] = Pi_n(rho Pi_n F_k).
struct NoiseProjection {
  std::vector<ModalVector> proj;
  std::vector<ModalVector> weighted;
};
std::vector<GridVector> noise_profiles(const Basis& b, int K);
NoiseProjection project_noise(const Basis& b, const NoiseModel& m, const GridScalar& rho,
                              const GridVector& u,
                              const std::vector<GridVector>* profiles = nullptr);

ModalVector momentum_noise_increment(const Basis& b, const NoiseModel& m, const GridScalar& rho,
                                     const GridVector& u, const std::vector<double>& dW);
ModalVector combine_increment(const NoiseProjection& np, const std::vector<double>& dW,
                              std::size_t size);

}  // namespace stochflow
