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
#include "stochflow/spectral_basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "stochflow/error.hpp"
#include "stochflow/kernels.hpp"

namespace stochflow {

namespace {

constexpr double kPi = std::numbers::pi;

// Fourier 1d layout: 0 -> constant, 2j-1 -> cos j, 2j -> sin j
int fourier_wave(int m) { return (m + 1) / 2; }
bool fourier_is_sin(int m) { return m > 0 && m % 2 == 0; }

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Basis::Basis(const BasisConfig& cfg) : cfg_(cfg) {
  if (cfg.dim < 1 || cfg.dim > 3)
    fail(ErrorCode::ConfigInvalid, "domain.dim must be 1, 2 or 3");
  if (cfg.modes < 1) fail(ErrorCode::ConfigInvalid, "domain.modes must be >= 1");
  for (int a = 0; a < cfg.dim; ++a)
    if (!(cfg.length[static_cast<std::size_t>(a)] > 0.0))
      fail(ErrorCode::ConfigInvalid, "domain.length must be positive");
  if (cfg.grid < 2 * cfg.modes + 1)
    fail(ErrorCode::ResolutionTooLow, "grid " + std::to_string(cfg.grid) + " < 2*" +
                                          std::to_string(cfg.modes) + "+1");

  const int d = cfg.dim, n = cfg.modes, N = cfg.grid;
  const auto un = static_cast<std::size_t>(n), uN = static_cast<std::size_t>(N);
  grid_size_ = ipow(uN, d);
  scalar_modes_ = ipow(un, d);
  cell_volume_ = 1.0;
  for (int a = 0; a < d; ++a) cell_volume_ *= spacing(a);

  synth_.resize(static_cast<std::size_t>(d));
  dsynth_ = analysis_ = danalysis_ = synth_;
  deriv_even_ = deriv_odd_ = dfwd_ = dinv_ = deig_ = synth_;

  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const double L = cfg.length[ua];
    const double h = spacing(a);
    auto& V = synth_[ua];
    auto& dV = dsynth_[ua];
    auto& A = analysis_[ua];
    auto& dA = danalysis_[ua];
    V.assign(uN * un, 0.0);
    dV = V;
    A.assign(un * uN, 0.0);
    dA = A;
    for (int j = 0; j < N; ++j) {
      const double x = coordinate(a, j);
      for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(j) * un + static_cast<std::size_t>(k);
        V[idx] = mode_value(a, k, x);
        dV[idx] = mode_derivative(a, k, x);
        A[static_cast<std::size_t>(k) * uN + static_cast<std::size_t>(j)] = h * V[idx];
        dA[static_cast<std::size_t>(k) * uN + static_cast<std::size_t>(j)] = h * dV[idx];
      }
    }

    // full-grid transforms for density-type fields
    auto& F = dfwd_[ua];
    auto& I = dinv_[ua];
    auto& E = deig_[ua];
    auto& De = deriv_even_[ua];
    auto& Do = deriv_odd_[ua];
    F.assign(uN * uN, 0.0);
    I = De = Do = F;
    E.assign(uN, 0.0);
    if (cfg.family == BasisFamily::Sine) {
      // cosine series on the midpoint grid and its sine partner
      std::vector<double> sfwd(uN * uN, 0.0);  // sine analysis, modes 1..N stored at k-1
      for (int k = 0; k < N; ++k) {
        const double kap = k * kPi / L;
        E[static_cast<std::size_t>(k)] = kap * kap;
        for (int j = 0; j < N; ++j) {
          const double arg = kPi * (j + 0.5) / N;
          const auto kj = static_cast<std::size_t>(k) * uN + static_cast<std::size_t>(j);
          const auto jk = static_cast<std::size_t>(j) * uN + static_cast<std::size_t>(k);
          I[jk] = std::cos(k * arg);
          F[kj] = (k == 0 ? 1.0 : 2.0) / N * std::cos(k * arg);
          sfwd[kj] = (k + 1 == N ? 1.0 : 2.0) / N * std::sin((k + 1) * arg);
        }
      }
      for (int j = 0; j < N; ++j) {
        const double arg = kPi * (j + 0.5) / N;
        for (int i = 0; i < N; ++i) {
          double se = 0.0, so = 0.0;
          for (int k = 1; k < N; ++k)
            se -= (k * kPi / L) * std::sin(k * arg) * F[static_cast<std::size_t>(k) * uN + static_cast<std::size_t>(i)];
          for (int k = 1; k <= N; ++k)
            so += (k * kPi / L) * std::cos(k * arg) *
                  sfwd[static_cast<std::size_t>(k - 1) * uN + static_cast<std::size_t>(i)];
          De[static_cast<std::size_t>(j) * uN + static_cast<std::size_t>(i)] = se;
          Do[static_cast<std::size_t>(j) * uN + static_cast<std::size_t>(i)] = so;
        }
      }
    } else {
      // real Fourier series on the uniform grid; Nyquist mode has zero derivative
      for (int m = 0; m < N; ++m) {
        const int w = fourier_wave(m);
        const bool is_sin = fourier_is_sin(m);
        const bool nyquist = (N % 2 == 0) && m == N - 1;
        const double kap = 2.0 * kPi * w / L;
        E[static_cast<std::size_t>(m)] = kap * kap;
        for (int j = 0; j < N; ++j) {
          const double arg = 2.0 * kPi * w * j / N;
          const double val = is_sin ? std::sin(arg) : std::cos(arg);
          const double scale = (m == 0 || nyquist) ? 1.0 / N : 2.0 / N;
          I[static_cast<std::size_t>(j) * uN + static_cast<std::size_t>(m)] = val;
          F[static_cast<std::size_t>(m) * uN + static_cast<std::size_t>(j)] = scale * val;
        }
      }
      for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
          double s = 0.0;
          for (int m = 1; m < N; ++m) {
            if ((N % 2 == 0) && m == N - 1) continue;
            const int w = fourier_wave(m);
            const double kap = 2.0 * kPi * w / L;
            const double arg = 2.0 * kPi * w * j / N;
            const double dval = fourier_is_sin(m) ? kap * std::cos(arg) : -kap * std::sin(arg);
            s += dval * F[static_cast<std::size_t>(m) * uN + static_cast<std::size_t>(i)];
          }
          De[static_cast<std::size_t>(j) * uN + static_cast<std::size_t>(i)] = s;
        }
      }
      Do = De;
    }
  }

  lap_eig_.assign(scalar_modes_, 0.0);
  tri_eig_.assign(scalar_modes_, 0.0);
  for (std::size_t m = 0; m < scalar_modes_; ++m) {
    const auto idx = mode_index(m);
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double kap = wavenumber(a, idx[static_cast<std::size_t>(a)]);
      k2 += kap * kap;
    }
    lap_eig_[m] = k2;
    tri_eig_[m] = k2 * k2 * k2;
  }
}

double Basis::min_spacing() const {
  double h = spacing(0);
  for (int a = 1; a < cfg_.dim; ++a) h = std::min(h, spacing(a));
  return h;
}

double Basis::volume() const {
  double v = 1.0;
  for (int a = 0; a < cfg_.dim; ++a) v *= cfg_.length[static_cast<std::size_t>(a)];
  return v;
}

double Basis::coordinate(int axis, int j) const {
  const double h = spacing(axis);
  return cfg_.family == BasisFamily::Sine ? (j + 0.5) * h : j * h;
}

std::array<int, 3> Basis::grid_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  const auto N = static_cast<std::size_t>(cfg_.grid);
  for (int a = cfg_.dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::array<int, 3> Basis::mode_index(std::size_t m) const {
  std::array<int, 3> idx{0, 0, 0};
  const auto n = static_cast<std::size_t>(cfg_.modes);
  for (int a = cfg_.dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(m % n);
    m /= n;
  }
  return idx;
}

double Basis::wavenumber(int axis, int k) const {
  const double L = cfg_.length[static_cast<std::size_t>(axis)];
  if (cfg_.family == BasisFamily::Sine) return (k + 1) * kPi / L;
  return 2.0 * kPi * fourier_wave(k) / L;
}

double Basis::mode_value(int axis, int k, double x) const {
  const double L = cfg_.length[static_cast<std::size_t>(axis)];
  const double kap = wavenumber(axis, k);
  if (cfg_.family == BasisFamily::Sine) return std::sqrt(2.0 / L) * std::sin(kap * x);
  if (k == 0) return 1.0 / std::sqrt(L);
  return std::sqrt(2.0 / L) * (fourier_is_sin(k) ? std::sin(kap * x) : std::cos(kap * x));
}

double Basis::mode_derivative(int axis, int k, double x) const {
  const double L = cfg_.length[static_cast<std::size_t>(axis)];
  const double kap = wavenumber(axis, k);
  if (cfg_.family == BasisFamily::Sine) return std::sqrt(2.0 / L) * kap * std::cos(kap * x);
  if (k == 0) return 0.0;
  return std::sqrt(2.0 / L) * kap * (fourier_is_sin(k) ? std::cos(kap * x) : -std::sin(kap * x));
}

const std::vector<double>& Basis::density_deriv(int a, Parity p) const {
  return p == Parity::Even ? deriv_even_[static_cast<std::size_t>(a)]
                           : deriv_odd_[static_cast<std::size_t>(a)];
}

Basis build_basis(const BasisConfig& cfg) { return Basis(cfg); }

std::vector<double> tensor_apply(const std::vector<double>& in, int dim,
                                 const std::array<std::size_t, 3>& in_dims,
                                 const std::array<const std::vector<double>*, 3>& mats,
                                 const std::array<std::size_t, 3>& out_dims) {
  std::vector<double> cur = in;
  std::array<std::size_t, 3> dims = in_dims;
  std::vector<double> next;
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (!mats[ua]) continue;
    std::size_t outer = 1, inner = 1;
    for (int b = 0; b < a; ++b) outer *= dims[static_cast<std::size_t>(b)];
    for (int b = a + 1; b < dim; ++b) inner *= dims[static_cast<std::size_t>(b)];
    next.assign(outer * out_dims[ua] * inner, 0.0);
    kernels::apply_axis(mats[ua]->data(), out_dims[ua], dims[ua], cur.data(), outer, inner,
                        next.data());
    dims[ua] = out_dims[ua];
    cur.swap(next);
  }
  return cur;
}

void check_grid(const Basis& b, const GridScalar& f, const char* what) {
  if (f.size() != b.grid_size())
    fail(ErrorCode::GridMismatch, std::string(what) + ": grid field has " +
                                      std::to_string(f.size()) + " values, expected " +
                                      std::to_string(b.grid_size()));
}

void check_coef(const Basis& b, const ModalVector& c, const char* what) {
  if (c.c.size() != b.coef_size())
    fail(ErrorCode::LengthMismatch, std::string(what) + ": " + std::to_string(c.c.size()) +
                                        " coefficients, expected " +
                                        std::to_string(b.coef_size()));
}

namespace {

std::array<std::size_t, 3> grid_dims(const Basis& b) {
  std::array<std::size_t, 3> d{1, 1, 1};
  for (int a = 0; a < b.dim(); ++a) d[static_cast<std::size_t>(a)] = static_cast<std::size_t>(b.grid());
  return d;
}

std::array<std::size_t, 3> mode_dims(const Basis& b) {
  std::array<std::size_t, 3> d{1, 1, 1};
  for (int a = 0; a < b.dim(); ++a) d[static_cast<std::size_t>(a)] = static_cast<std::size_t>(b.modes());
  return d;
}

std::vector<double> component(const Basis& b, const ModalVector& c, int a) {
  const std::size_t m = b.scalar_modes();
  return std::vector<double>(c.c.begin() + static_cast<std::ptrdiff_t>(a * m),
                             c.c.begin() + static_cast<std::ptrdiff_t>((a + 1) * m));
}

// synthesize a scalar modal field with the derivative taken along axis deriv_axis (-1: none)
GridScalar synth_with(const Basis& b, const std::vector<double>& coef, int deriv_axis) {
  std::array<const std::vector<double>*, 3> mats{nullptr, nullptr, nullptr};
  for (int a = 0; a < b.dim(); ++a)
    mats[static_cast<std::size_t>(a)] = a == deriv_axis ? &b.dsynth(a) : &b.synth(a);
  return tensor_apply(coef, b.dim(), mode_dims(b), mats, grid_dims(b));
}

std::vector<double> analyse_with(const Basis& b, const GridScalar& f, int deriv_axis) {
  std::array<const std::vector<double>*, 3> mats{nullptr, nullptr, nullptr};
  for (int a = 0; a < b.dim(); ++a)
    mats[static_cast<std::size_t>(a)] = a == deriv_axis ? &b.danalysis(a) : &b.analysis(a);
  return tensor_apply(f, b.dim(), grid_dims(b), mats, mode_dims(b));
}

}  // namespace

std::vector<double> project_scalar(const Basis& b, const GridScalar& f) {
  check_grid(b, f, "project");
  return analyse_with(b, f, -1);
}

GridScalar synthesize_scalar(const Basis& b, const std::vector<double>& coef) {
  if (coef.size() != b.scalar_modes())
    fail(ErrorCode::LengthMismatch, "synthesize_scalar: wrong coefficient count");
  return synth_with(b, coef, -1);
}

ModalVector project(const Basis& b, const GridVector& f) {
  if (f.dim != b.dim() || static_cast<int>(f.comp.size()) != b.dim())
    fail(ErrorCode::GridMismatch, "project: vector field dimension mismatch");
  ModalVector out;
  out.c.reserve(b.coef_size());
  for (int a = 0; a < b.dim(); ++a) {
    const auto part = project_scalar(b, f.comp[static_cast<std::size_t>(a)]);
    out.c.insert(out.c.end(), part.begin(), part.end());
  }
  return out;
}

GridVector synthesize(const Basis& b, const ModalVector& c) {
  check_coef(b, c, "synthesize");
  GridVector u;
  u.dim = b.dim();
  for (int a = 0; a < b.dim(); ++a) u.comp.push_back(synth_with(b, component(b, c, a), -1));
  return u;
}

GridTensor gradient(const Basis& b, const ModalVector& c) {
  check_coef(b, c, "gradient");
  GridTensor g;
  g.dim = b.dim();
  for (int a = 0; a < b.dim(); ++a) {
    const auto ca = component(b, c, a);
    for (int k = 0; k < b.dim(); ++k) g.comp.push_back(synth_with(b, ca, k));
  }
  return g;
}

GridTensor sym_gradient(const Basis& b, const ModalVector& c) {
  GridTensor g = gradient(b, c);
  const int d = b.dim();
  for (int a = 0; a < d; ++a)
    for (int k = a + 1; k < d; ++k) {
      auto& x = g.at(a, k);
      auto& y = g.at(k, a);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = 0.5 * (x[i] + y[i]);
        x[i] = s;
        y[i] = s;
      }
    }
  return g;
}

GridScalar divergence(const Basis& b, const ModalVector& c) {
  check_coef(b, c, "divergence");
  GridScalar div(b.grid_size(), 0.0);
  for (int a = 0; a < b.dim(); ++a) {
    const auto part = synth_with(b, component(b, c, a), a);
    for (std::size_t i = 0; i < div.size(); ++i) div[i] += part[i];
  }
  return div;
}

ModalVector tri_laplacian(const Basis& b, const ModalVector& c) {
  check_coef(b, c, "tri_laplacian");
  ModalVector out = c;
  const std::size_t m = b.scalar_modes();
  const auto& eig = b.trilaplace_eigen();
  for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] *= -eig[i % m];
  return out;
}

DiffResult differentiate(const Basis& b, const ModalVector& c, DiffOp op) {
  switch (op) {
    case DiffOp::SymGradient: return sym_gradient(b, c);
    case DiffOp::Divergence: return divergence(b, c);
    case DiffOp::TriLaplacian: return tri_laplacian(b, c);
  }
  return divergence(b, c);
}

ModalVector pair_with_gradients(const Basis& b, const GridTensor& T) {
  const int d = b.dim();
  if (T.dim != d || static_cast<int>(T.comp.size()) != d * d)
    fail(ErrorCode::GridMismatch, "pair_with_gradients: tensor dimension mismatch");
  ModalVector out;
  out.c.assign(b.coef_size(), 0.0);
  const std::size_t m = b.scalar_modes();
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < d; ++k) {
      const auto part = analyse_with(b, T.at(a, k), k);
      for (std::size_t i = 0; i < m; ++i) out.c[static_cast<std::size_t>(a) * m + i] += part[i];
    }
  return out;
}

GridScalar density_derivative(const Basis& b, const GridScalar& f, int axis, Parity parity) {
  check_grid(b, f, "density_derivative");
  std::array<const std::vector<double>*, 3> mats{nullptr, nullptr, nullptr};
  mats[static_cast<std::size_t>(axis)] = &b.density_deriv(axis, parity);
  const auto g = grid_dims(b);
  return tensor_apply(f, b.dim(), g, mats, g);
}

namespace {
GridScalar density_spectral_map(const Basis& b, const GridScalar& f, double coef, bool solve) {
  const auto g = grid_dims(b);
  std::array<const std::vector<double>*, 3> fwd{nullptr, nullptr, nullptr};
  std::array<const std::vector<double>*, 3> inv{nullptr, nullptr, nullptr};
  for (int a = 0; a < b.dim(); ++a) {
    fwd[static_cast<std::size_t>(a)] = &b.density_fwd(a);
    inv[static_cast<std::size_t>(a)] = &b.density_inv(a);
  }
  auto spec = tensor_apply(f, b.dim(), g, fwd, g);
  const auto N = static_cast<std::size_t>(b.grid());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    std::size_t flat = i;
    double k2 = 0.0;
    for (int a = b.dim() - 1; a >= 0; --a) {
      k2 += b.density_eig(a)[flat % N];
      flat /= N;
    }
    spec[i] *= solve ? 1.0 / (1.0 + coef * k2) : -k2;
  }
  return tensor_apply(spec, b.dim(), g, inv, g);
}
}  // namespace

GridScalar density_laplacian(const Basis& b, const GridScalar& f) {
  check_grid(b, f, "density_laplacian");
  return density_spectral_map(b, f, 0.0, false);
}

GridScalar density_diffusion_solve(const Basis& b, const GridScalar& f, double coef) {
  check_grid(b, f, "density_diffusion_solve");
  if (coef == 0.0) return f;
  return density_spectral_map(b, f, coef, true);
}

double grid_integral(const Basis& b, const GridScalar& f) {
  check_grid(b, f, "grid_integral");
  return b.cell_volume() * kernels::sum(f.data(), f.size());
}

double grid_inner(const Basis& b, const GridScalar& f, const GridScalar& g) {
  check_grid(b, f, "grid_inner");
  check_grid(b, g, "grid_inner");
  return b.cell_volume() * kernels::dot(f.data(), g.data(), f.size());
}

double grid_inner(const Basis& b, const GridVector& f, const GridVector& g) {
  double s = 0.0;
  for (int a = 0; a < b.dim(); ++a)
    s += grid_inner(b, f.comp[static_cast<std::size_t>(a)], g.comp[static_cast<std::size_t>(a)]);
  return s;
}

double coef_norm(const ModalVector& c) {
  return std::sqrt(kernels::dot(c.c.data(), c.c.data(), c.c.size()));
}

}  // namespace stochflow
