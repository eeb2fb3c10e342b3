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
#include <variant>
#include <vector>

namespace stochflow {

enum class BasisFamily { Sine, Fourier };

struct BasisConfig {
  int dim = 2;
  std::array<double, 3> length{1.0, 1.0, 1.0};
  BasisFamily family = BasisFamily::Sine;
  int modes = 16;  // per axis
  int grid = 48;   // per axis
};

using GridScalar = std::vector<double>;

// Velocity coefficients, component-major: c[a * n^d + m].
struct ModalVector {
  std::vector<double> c;
};

struct GridVector {
  int dim = 0;
  std::vector<GridScalar> comp;
};

// Full d x d tensor field, comp[a * d + b].
struct GridTensor {
  int dim = 0;
  std::vector<GridScalar> comp;
  GridScalar& at(int a, int b) { return comp[static_cast<std::size_t>(a * dim + b)]; }
  const GridScalar& at(int a, int b) const { return comp[static_cast<std::size_t>(a * dim + b)]; }
};

// Interpretation of a grid function along one axis for density-type fields:
// Even = cosine series (Neumann), Odd = sine series.  Periodic grids ignore it.
enum class Parity { Even, Odd };

class Basis {
 public:
  explicit Basis(const BasisConfig& cfg);

  const BasisConfig& config() const { return cfg_; }
  int dim() const { return cfg_.dim; }
  int modes() const { return cfg_.modes; }
  int grid() const { return cfg_.grid; }
  BasisFamily family() const { return cfg_.family; }

  std::size_t grid_size() const { return grid_size_; }
  std::size_t scalar_modes() const { return scalar_modes_; }
  std::size_t coef_size() const { return scalar_modes_ * static_cast<std::size_t>(cfg_.dim); }

  double spacing(int axis) const { return cfg_.length[static_cast<std::size_t>(axis)] / cfg_.grid; }
  double min_spacing() const;
  double cell_volume() const { return cell_volume_; }
  double volume() const;
  double coordinate(int axis, int j) const;
  std::array<int, 3> grid_index(std::size_t flat) const;
  std::array<int, 3> mode_index(std::size_t m) const;

  // wave number of the 1d mode at position k (0..n-1) along axis
  double wavenumber(int axis, int k) const;
  // 1d velocity mode k (0..n-1) evaluated at x, and its derivative
  double mode_value(int axis, int k, double x) const;
  double mode_derivative(int axis, int k, double x) const;

  const std::vector<double>& laplace_eigen() const { return lap_eig_; }
  const std::vector<double>& trilaplace_eigen() const { return tri_eig_; }

  // per-axis dense operators (row-major)
  const std::vector<double>& synth(int a) const { return synth_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& dsynth(int a) const { return dsynth_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& analysis(int a) const { return analysis_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& danalysis(int a) const { return danalysis_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& density_deriv(int a, Parity p) const;
  const std::vector<double>& density_fwd(int a) const { return dfwd_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& density_inv(int a) const { return dinv_[static_cast<std::size_t>(a)]; }
  const std::vector<double>& density_eig(int a) const { return deig_[static_cast<std::size_t>(a)]; }

 private:
  BasisConfig cfg_;
  std::size_t grid_size_ = 0;
  std::size_t scalar_modes_ = 0;
  double cell_volume_ = 0.0;
  std::vector<double> lap_eig_, tri_eig_;
  std::vector<std::vector<double>> synth_, dsynth_, analysis_, danalysis_;
  std::vector<std::vector<double>> deriv_even_, deriv_odd_, dfwd_, dinv_, deig_;
};

Basis build_basis(const BasisConfig& cfg);

// Apply one N_out x N_in matrix per axis to a row-major d-dimensional array.
std::vector<double> tensor_apply(const std::vector<double>& in, int dim,
                                 const std::array<std::size_t, 3>& in_dims,
                                 const std::array<const std::vector<double>*, 3>& mats,
                                 const std::array<std::size_t, 3>& out_dims);

ModalVector project(const Basis& b, const GridVector& f);
std::vector<double> project_scalar(const Basis& b, const GridScalar& f);
GridVector synthesize(const Basis& b, const ModalVector& c);
GridScalar synthesize_scalar(const Basis& b, const std::vector<double>& coef);

GridTensor gradient(const Basis& b, const ModalVector& c);  // at(a, k) = d_k u_a
GridTensor sym_gradient(const Basis& b, const ModalVector& c);
GridScalar divergence(const Basis& b, const ModalVector& c);
ModalVector tri_laplacian(const Basis& b, const ModalVector& c);

enum class DiffOp { SymGradient, Divergence, TriLaplacian };
using DiffResult = std::variant<GridTensor, GridScalar, ModalVector>;
DiffResult differentiate(const Basis& b, const ModalVector& c, DiffOp op);

// coefficient i = <T_ab, d_b omega_{i,a}>_h  (quadrature pairing with basis gradients)
ModalVector pair_with_gradients(const Basis& b, const GridTensor& T);

// density-type grid operators
GridScalar density_derivative(const Basis& b, const GridScalar& f, int axis, Parity parity);
GridScalar density_laplacian(const Basis& b, const GridScalar& f);
// (I - coef * Laplacian)^{-1} f, Neumann/periodic
GridScalar density_diffusion_solve(const Basis& b, const GridScalar& f, double coef);

double grid_integral(const Basis& b, const GridScalar& f);
double grid_inner(const Basis& b, const GridScalar& f, const GridScalar& g);
double grid_inner(const Basis& b, const GridVector& f, const GridVector& g);
double coef_norm(const ModalVector& c);

void check_grid(const Basis& b, const GridScalar& f, const char* what);
void check_coef(const Basis& b, const ModalVector& c, const char* what);

}  // namespace stochflow
