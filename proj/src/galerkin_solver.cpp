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
#include "stochflow/galerkin_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stochflow/error.hpp"
#include "stochflow/kernels.hpp"

namespace stochflow {

int SolverParams::steps() const { return static_cast<int>(std::llround(T / dt)); }

void SolverParams::validate() const {
  std::ostringstream why;
  if (!(dt > 0.0)) why << "solver.dt must be > 0; ";
  if (!(T > 0.0)) why << "solver.T must be > 0; ";
  if (dt > 0.0 && T > 0.0 && steps() < 1) why << "solver.T/solver.dt gives no steps; ";
  if (!(mu >= 0.0)) why << "solver.mu must be >= 0; ";
  if (!(epsilon >= 0.0)) why << "solver.epsilon must be >= 0; ";
  if (!(R > 0.0)) why << "solver.R must be > 0; ";
  if (!(guard > 0.0)) why << "solver.guard must be > 0; ";
  if (!(cfl_safety > 0.0)) why << "solver.cfl_safety must be > 0; ";
  if (checkpoints < 1) why << "solver.checkpoints must be >= 1; ";
  if (level == SolverLevel::Base && (mu != 0.0 || epsilon != 0.0))
    why << "solver.level = base requires mu = epsilon = 0; ";
  if (!why.str().empty()) fail(ErrorCode::ConfigInvalid, why.str());
}

void InitialLaw::validate() const {
  std::ostringstream why;
  if (!(rho_low > 0.0 && rho_low <= rho_high)) why << "initial.rho_low/rho_high must satisfy 0 < low <= high; ";
  if (density_modes < 0) why << "initial.density_modes must be >= 0; ";
  if (!(velocity_norm >= 0.0)) why << "initial.velocity_norm must be >= 0; ";
  if (velocity_modes < 1) why << "initial.velocity_modes must be >= 1; ";
  if (!(moment_r >= 1.0)) why << "initial.moment_r must be >= 1; ";
  const double moment = norm_law == VelocityNormLaw::Uniform
                            ? std::pow(velocity_norm, moment_r) / (moment_r + 1.0)
                            : std::pow(velocity_norm, moment_r);
  if (moment > moment_bound) why << "initial.moment_bound is below E||u0||^r; ";
  if (!why.str().empty()) fail(ErrorCode::ConfigInvalid, why.str());
}

void SimulationSetup::validate() const {
  (void)build_basis(basis);
  model.validate();
  noise.validate();
  solver.validate();
  initial.validate();
}

double chi_blend(double s) { return 1.0 - smoothstep(s); }

ModalVector velocity_cutoff(const ModalVector& c, double R) {
  const double chi = chi_blend(coef_norm(c) - R);
  ModalVector out = c;
  if (chi != 1.0)
    for (double& v : out.c) v *= chi;
  return out;
}

// ---------------------------------------------------------------- mass solves

ModalVector mass_apply(const Basis& b, const GridScalar& rho, const ModalVector& c,
                       const std::vector<double>* shift) {
  GridVector u = synthesize(b, c);
  for (auto& comp : u.comp) kernels::multiply(kernels::default_exec(), comp.data(), rho.data(), comp.data(), comp.size());
  ModalVector out = project(b, u);
  if (shift)
    for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] += (*shift)[i] * c.c[i];
  return out;
}

namespace {

void require_positive_density(const Basis& b, const GridScalar& rho, const char* where) {
  check_grid(b, rho, where);
}

// in-place lower Cholesky of an m x m row-major matrix
void cholesky(std::vector<double>& A, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double d = A[j * m + j];
    for (std::size_t k = 0; k < j; ++k) d -= A[j * m + k] * A[j * m + k];
    if (!(d > 0.0))
      fail(ErrorCode::NotPositiveDefinite,
           "mass matrix pivot " + std::to_string(j) + " is " + std::to_string(d));
    const double l = std::sqrt(d);
    A[j * m + j] = l;
    for (std::size_t i = j + 1; i < m; ++i) {
      double s = A[i * m + j];
      for (std::size_t k = 0; k < j; ++k) s -= A[i * m + k] * A[j * m + k];
      A[i * m + j] = s / l;
    }
  }
}

void cholesky_solve(const std::vector<double>& L, std::size_t m, double* x) {
  for (std::size_t i = 0; i < m; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= L[i * m + k] * x[k];
    x[i] = s / L[i * m + i];
  }
  for (std::size_t i = m; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < m; ++k) s -= L[k * m + i] * x[k];
    x[i] = s / L[i * m + i];
  }
}

}  // namespace

ModalVector assemble_mass_solve(const Basis& b, const GridScalar& rho, const ModalVector& rhs,
                                const std::vector<double>* shift) {
  require_positive_density(b, rho, "assemble_mass_solve");
  check_coef(b, rhs, "assemble_mass_solve");
  const std::size_t m = b.scalar_modes();
  std::vector<double> G(m * m, 0.0);
  std::vector<double> e(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    GridScalar f = synthesize_scalar(b, e);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= rho[i];
    const auto col = project_scalar(b, f);
    for (std::size_t i = 0; i < m; ++i) G[i * m + j] = col[i];
  }
  // symmetrize against quadrature round-off
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double s = 0.5 * (G[i * m + j] + G[j * m + i]);
      G[i * m + j] = G[j * m + i] = s;
    }
  ModalVector out = rhs;
  for (int a = 0; a < b.dim(); ++a) {
    std::vector<double> A = G;
    const std::size_t off = static_cast<std::size_t>(a) * m;
    if (shift)
      for (std::size_t i = 0; i < m; ++i) A[i * m + i] += (*shift)[off + i];
    cholesky(A, m);
    cholesky_solve(A, m, out.c.data() + off);
  }
  return out;
}

ModalVector mass_solve_cg(const Basis& b, const GridScalar& rho, const ModalVector& rhs,
                          const std::vector<double>* shift, const ModalVector* guess, double tol) {
  require_positive_density(b, rho, "mass_solve_cg");
  check_coef(b, rhs, "mass_solve_cg");
  const std::size_t n = rhs.c.size();
  const double rho_mean = kernels::sum(rho.data(), rho.size()) / static_cast<double>(rho.size());
  if (!(rho_mean > 0.0)) fail(ErrorCode::NotPositiveDefinite, "mean density is not positive");
  std::vector<double> pre(n);
  for (std::size_t i = 0; i < n; ++i) pre[i] = 1.0 / (rho_mean + (shift ? (*shift)[i] : 0.0));

  ModalVector x;
  if (guess)
    x = *guess;
  else
    x.c.assign(n, 0.0);
  ModalVector r = rhs;
  {
    const ModalVector Ax = mass_apply(b, rho, x, shift);
    for (std::size_t i = 0; i < n; ++i) r.c[i] -= Ax.c[i];
  }
  const double bnorm = std::sqrt(kernels::dot(rhs.c.data(), rhs.c.data(), n));
  if (bnorm == 0.0) {
    x.c.assign(n, 0.0);
    return x;
  }
  ModalVector z = r;
  for (std::size_t i = 0; i < n; ++i) z.c[i] *= pre[i];
  ModalVector p = z;
  double rz = kernels::dot(r.c.data(), z.c.data(), n);
  const int max_iter = 1000;
  double rnorm = std::sqrt(kernels::dot(r.c.data(), r.c.data(), n));
  double best = rnorm;
  int stall = 0;
  for (int it = 0; it < max_iter && rnorm > tol * bnorm; ++it) {
    const ModalVector Ap = mass_apply(b, rho, p, shift);
    const double pAp = kernels::dot(p.c.data(), Ap.c.data(), n);
    if (!(pAp > 0.0))
      fail(ErrorCode::NotPositiveDefinite, "mass matrix has non-positive curvature " + std::to_string(pAp));
    const double alpha = rz / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      x.c[i] += alpha * p.c[i];
      r.c[i] -= alpha * Ap.c[i];
    }
    rnorm = std::sqrt(kernels::dot(r.c.data(), r.c.data(), n));
    if (rnorm < 0.5 * best) {
      best = rnorm;
      stall = 0;
    } else if (++stall > 8) {
      break;  // stagnated at round-off level
    }
    for (std::size_t i = 0; i < n; ++i) z.c[i] = r.c[i] * pre[i];
    const double rz_new = kernels::dot(r.c.data(), z.c.data(), n);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p.c[i] = z.c[i] + beta * p.c[i];
  }
  if (rnorm > 1e-9 * bnorm)
    fail(ErrorCode::NotPositiveDefinite, "mass solve did not converge, relative residual " +
                                             std::to_string(rnorm / bnorm));
  return x;
}

// ---------------------------------------------------------------- initial data

namespace {

// smooth scalar profile along one axis for density perturbations
double density_axis_mode(const Basis& b, int axis, int q, double x) {
  const double L = b.config().length[static_cast<std::size_t>(axis)];
  if (b.family() == BasisFamily::Sine) return std::cos(q * std::numbers::pi * x / L);
  if (q == 0) return 1.0;
  const int w = (q + 1) / 2;
  const double arg = 2.0 * std::numbers::pi * w * x / L;
  return q % 2 == 0 ? std::sin(arg) : std::cos(arg);
}

std::uint32_t mode_code(const std::array<int, 3>& idx) {
  return static_cast<std::uint32_t>(idx[0] + 64 * idx[1] + 4096 * idx[2]);
}

}  // namespace

SolverState sample_initial_data(const InitialLaw& law, const Basis& b, const RngKey& key) {
  SolverState s;
  s.key = key;
  const int d = b.dim();
  s.rho.assign(b.grid_size(), 0.5 * (law.rho_low + law.rho_high));
  const double half = 0.5 * (law.rho_high - law.rho_low);
  if (half > 0.0 && law.density_modes > 0) {
    const int per_axis = b.family() == BasisFamily::Sine ? law.density_modes + 1
                                                          : 2 * law.density_modes + 1;
    std::vector<std::array<int, 3>> modes;
    std::vector<double> amp;
    double total = 0.0;
    std::array<int, 3> q{0, 0, 0};
    const int count = static_cast<int>(std::pow(per_axis, d));
    for (int flat = 1; flat < count; ++flat) {
      int rest = flat;
      double k2 = 0.0;
      for (int a = 0; a < d; ++a) {
        q[static_cast<std::size_t>(a)] = rest % per_axis;
        rest /= per_axis;
        const double w = b.family() == BasisFamily::Sine ? q[static_cast<std::size_t>(a)]
                                                         : (q[static_cast<std::size_t>(a)] + 1) / 2;
        k2 += w * w;
      }
      const double a_k = standard_normal(key, 0, mode_code(q), Stream::InitialDensity) / (1.0 + k2);
      modes.push_back(q);
      amp.push_back(a_k);
      total += std::abs(a_k);
    }
    if (total > 0.0) {
      for (std::size_t i = 0; i < b.grid_size(); ++i) {
        const auto g = b.grid_index(i);
        double f = 0.0;
        for (std::size_t m = 0; m < modes.size(); ++m) {
          double v = amp[m];
          for (int a = 0; a < d; ++a)
            v *= density_axis_mode(b, a, modes[m][static_cast<std::size_t>(a)],
                                   b.coordinate(a, g[static_cast<std::size_t>(a)]));
          f += v;
        }
        s.rho[i] += half * f / total;
      }
    }
  }

  s.c.c.assign(b.coef_size(), 0.0);
  if (law.velocity_norm > 0.0) {
    const std::size_t m = b.scalar_modes();
    double norm2 = 0.0;
    for (int a = 0; a < d; ++a)
      for (std::size_t i = 0; i < m; ++i) {
        const auto idx = b.mode_index(i);
        bool low = true;
        for (int ax = 0; ax < d; ++ax) low = low && idx[static_cast<std::size_t>(ax)] < law.velocity_modes;
        if (!low) continue;
        const double k2 = b.laplace_eigen()[i] / (std::numbers::pi * std::numbers::pi);
        const double v = standard_normal(key, static_cast<std::uint32_t>(a), mode_code(idx),
                                         Stream::InitialVelocity) /
                         std::pow(1.0 + k2, law.decay);
        s.c.c[static_cast<std::size_t>(a) * m + i] = v;
        norm2 += v * v;
      }
    const double scale = law.norm_law == VelocityNormLaw::Uniform
                             ? law.velocity_norm * uniform01(key, 0, 0, Stream::InitialNorm)
                             : law.velocity_norm;
    if (norm2 > 0.0)
      for (double& v : s.c.c) v *= scale / std::sqrt(norm2);
  }
  return s;
}

// ---------------------------------------------------------------- stepping

namespace {

struct Fields {
  GridVector u;
  GridTensor grad;
  double chi = 1.0;
};

Fields make_fields(const Basis& b, const SolverState& s, double R) {
  Fields f;
  f.u = synthesize(b, s.c);
  f.grad = gradient(b, s.c);
  f.chi = std::isfinite(R) ? chi_blend(coef_norm(s.c) - R) : 1.0;
  return f;
}

SymTensor strain_at(const GridTensor& grad, int d, std::size_t i) {
  SymTensor D(d);
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < d; ++k) D(a, k) = 0.5 * (grad.at(a, k)[i] + grad.at(k, a)[i]);
  return D;
}

LedgerRow compute_row(const Basis& b, const ConstitutiveModel& model, const SolverParams& params,
                      double mu, double eps, const SolverState& s, const Fields& f,
                      const NoiseProjection* np) {
  const int d = b.dim();
  const std::size_t G = b.grid_size();
  LedgerRow row;
  row.t = s.t;
  row.dt = params.dt;
  row.stopped = s.stopped ? 1 : 0;
  row.chi = f.chi;
  row.norm_u = coef_norm(s.c);
  row.mass = grid_integral(b, s.rho);
  row.min_rho = *std::min_element(s.rho.begin(), s.rho.end());
  row.max_rho = *std::max_element(s.rho.begin(), s.rho.end());

  GridScalar ke(G), pot(G), fd(G), fs(G), sp(G), logr(G), ent(G);
  double div_inf = 0.0;
  for (std::size_t i = 0; i < G; ++i) {
    double u2 = 0.0;
    for (int a = 0; a < d; ++a) u2 += f.u.comp[static_cast<std::size_t>(a)][i] * f.u.comp[static_cast<std::size_t>(a)][i];
    ke[i] = 0.5 * s.rho[i] * u2;
    pot[i] = pressure_potential(model, s.rho[i]);
    logr[i] = std::log(s.rho[i]);
    ent[i] = s.rho[i] * logr[i];
    const SymTensor D = strain_at(f.grad, d, i);
    const SymTensor S = stress_of_strain(model, D);
    fd[i] = potential_value(model, D);
    fs[i] = conjugate_value(model, S);
    double power = 0.0, div = 0.0;
    for (int a = 0; a < d; ++a) {
      div += f.grad.at(a, a)[i];
      for (int k = 0; k < d; ++k) power += S(a, k) * f.grad.at(a, k)[i];
    }
    sp[i] = power;
    div_inf = std::max(div_inf, std::abs(div));
  }
  row.kinetic = grid_integral(b, ke);
  row.potential = grid_integral(b, pot);
  row.dissipation_F = grid_integral(b, fd);
  row.dissipation_Fstar = grid_integral(b, fs);
  row.stress_power = grid_integral(b, sp);
  row.entropy = grid_integral(b, ent);
  row.div_u_inf = f.chi * div_inf;

  // discrete-consistent entropy production terms
  double rdu = 0.0, fisher = 0.0;
  GridScalar flux(G);
  for (int a = 0; a < d; ++a) {
    const GridScalar dlog = density_derivative(b, logr, a, Parity::Even);
    const GridScalar drho = density_derivative(b, s.rho, a, Parity::Even);
    const auto& ua = f.u.comp[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < G; ++i) flux[i] = f.chi * s.rho[i] * ua[i];
    rdu -= grid_inner(b, dlog, flux);
    fisher += grid_inner(b, dlog, drho);
  }
  row.rho_div_u = rdu;
  row.fisher = fisher;

  if (mu > 0.0) {
    const std::size_t m = b.scalar_modes();
    double acc = 0.0;
    for (std::size_t i = 0; i < s.c.c.size(); ++i) acc += b.trilaplace_eigen()[i % m] * s.c.c[i] * s.c.c[i];
    row.dissipation_mu = mu * acc;
  }
  if (eps > 0.0) {
    double acc = 0.0;
    GridScalar w(G);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) {
        const auto& g = f.grad.at(a, k);
        for (std::size_t i = 0; i < G; ++i) w[i] = s.rho[i] * g[i] * g[i];
        acc += grid_integral(b, w);
      }
    GridScalar hp(G);
    for (std::size_t i = 0; i < G; ++i) hp[i] = pressure_enthalpy(model, s.rho[i]);
    for (int a = 0; a < d; ++a)
      acc += grid_inner(b, density_derivative(b, hp, a, Parity::Even),
                        density_derivative(b, s.rho, a, Parity::Even));
    row.dissipation_eps = eps * acc;
  }
  if (np) {
    double ito = 0.0;
    for (std::size_t k = 0; k < np->proj.size(); ++k)
      ito += kernels::dot(np->proj[k].c.data(), np->weighted[k].c.data(), np->proj[k].c.size());
    row.ito_correction = 0.5 * ito;
  }
  return row;
}

struct LevelParams {
  double mu = 0.0;
  double eps = 0.0;
  double R = kInf;
};

SolverState advance(const SolverState& s, const SolverParams& params, const LevelParams& lp,
                    const ConstitutiveModel& model, const NoiseModel& noise, const Basis& b,
                    const StepOptions& opt) {
  if (s.stopped) fail(ErrorCode::ConfigInvalid, "step called on a stopped state");
  check_grid(b, s.rho, "step density");
  check_coef(b, s.c, "step velocity");
  const int d = b.dim();
  const std::size_t G = b.grid_size();
  const double dt = params.dt;
  const Fields f = make_fields(b, s, lp.R);
  const double chi = f.chi;

  // CFL
  double umax = 0.0;
  for (std::size_t i = 0; i < G; ++i) {
    double u2 = 0.0;
    for (int a = 0; a < d; ++a) u2 += f.u.comp[static_cast<std::size_t>(a)][i] * f.u.comp[static_cast<std::size_t>(a)][i];
    umax = std::max(umax, std::sqrt(u2));
  }
  umax *= chi;
  const double rho_max = *std::max_element(s.rho.begin(), s.rho.end());
  const double speed = std::max(umax, std::sqrt(pressure_derivative(model, std::max(rho_max, 0.0))));
  if (dt * speed > params.cfl_safety * b.min_spacing()) {
    std::ostringstream msg;
    msg << "dt = " << dt << " exceeds CFL limit " << params.cfl_safety * b.min_spacing() / speed
        << " (max speed " << speed << ")";
    fail(ErrorCode::CflViolated, msg.str());
  }

  // continuity: explicit transport, implicit diffusion
  GridScalar rho_new = s.rho;
  {
    GridScalar flux(G);
    for (int a = 0; a < d; ++a) {
      const auto& ua = f.u.comp[static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < G; ++i) flux[i] = chi * s.rho[i] * ua[i];
      const GridScalar df = density_derivative(b, flux, a, Parity::Odd);
      kernels::axpy(kernels::default_exec(), -dt, df.data(), rho_new.data(), G);
    }
    if (lp.eps > 0.0) rho_new = density_diffusion_solve(b, rho_new, lp.eps * dt);
  }

  // momentum right-hand side (weak form)
  GridTensor T;
  T.dim = d;
  T.comp.assign(static_cast<std::size_t>(d * d), GridScalar(G, 0.0));
  std::vector<GridScalar> drho;
  if (lp.eps > 0.0)
    for (int k = 0; k < d; ++k) drho.push_back(density_derivative(b, s.rho, k, Parity::Even));
  for (std::size_t i = 0; i < G; ++i) {
    const SymTensor S = stress_of_strain(model, strain_at(f.grad, d, i));
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) {
        const double ua = f.u.comp[static_cast<std::size_t>(a)][i];
        const double uk = f.u.comp[static_cast<std::size_t>(k)][i];
        double v = chi * s.rho[i] * ua * uk - S(a, k);
        if (lp.eps > 0.0)
          v -= lp.eps * (s.rho[i] * f.grad.at(a, k)[i] + ua * drho[static_cast<std::size_t>(k)][i]);
        T.at(a, k)[i] = v;
      }
  }
  ModalVector rhs_rate = pair_with_gradients(b, T);
  {
    GridScalar hp(G);
    for (std::size_t i = 0; i < G; ++i) hp[i] = pressure_enthalpy(model, s.rho[i]);
    GridVector force;
    force.dim = d;
    for (int a = 0; a < d; ++a) {
      GridScalar g = density_derivative(b, hp, a, Parity::Even);
      for (std::size_t i = 0; i < G; ++i) g[i] *= chi * s.rho[i];
      force.comp.push_back(std::move(g));
    }
    const ModalVector pf = project(b, force);
    for (std::size_t i = 0; i < rhs_rate.c.size(); ++i) rhs_rate.c[i] -= pf.c[i];
  }

  // b^n = Pi_n(rho u)
  GridVector mom = f.u;
  for (auto& comp : mom.comp)
    for (std::size_t i = 0; i < G; ++i) comp[i] *= s.rho[i];
  ModalVector rhs = project(b, mom);
  for (std::size_t i = 0; i < rhs.c.size(); ++i) rhs.c[i] += dt * rhs_rate.c[i];

  // noise
  NoiseProjection np = project_noise(b, noise, s.rho, f.u, opt.profiles);
  WienerIncrement dW = sample_increments(s.key, s.step, dt, static_cast<int>(np.weighted.size()));
  const ModalVector inc = combine_increment(np, dW.dW, b.coef_size());
  for (std::size_t i = 0; i < rhs.c.size(); ++i) rhs.c[i] += inc.c[i];

  // positivity before the solve so the mass matrix is meaningful
  const double rho_min = *std::min_element(rho_new.begin(), rho_new.end());
  if (!(rho_min > 0.0)) {
    std::ostringstream msg;
    msg << "min density " << rho_min << " after step at t = " << s.t;
    fail(ErrorCode::PositivityLost, msg.str());
  }

  std::vector<double> shift;
  if (lp.mu > 0.0) {
    const std::size_t m = b.scalar_modes();
    shift.resize(b.coef_size());
    for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = lp.mu * dt * b.trilaplace_eigen()[i % m];
  }
  const std::vector<double>* sh = shift.empty() ? nullptr : &shift;
  const bool dense = params.mass_solver == MassSolver::Dense ||
                     (params.mass_solver == MassSolver::Auto && b.scalar_modes() <= 64);
  SolverState out;
  out.c = dense ? assemble_mass_solve(b, rho_new, rhs, sh)
                : mass_solve_cg(b, rho_new, rhs, sh, &s.c, params.cg_tol);
  out.rho = std::move(rho_new);
  out.t = s.t + dt;
  out.step = s.step + 1;
  out.key = s.key;

  if (opt.row || opt.observer) {
    LedgerRow row = compute_row(b, model, params, lp.mu, lp.eps, s, f, &np);
    row.noise_work_increment = kernels::dot(s.c.c.data(), inc.c.data(), inc.c.size());
    row.qv_empirical = kernels::dot(inc.c.data(), inc.c.data(), inc.c.size());
    double pred = 0.0;
    for (const auto& g : np.weighted) pred += kernels::dot(g.c.data(), g.c.data(), g.c.size());
    row.qv_predicted = pred * dt;
    if (opt.observer) {
      StepView v;
      v.basis = &b;
      v.model = &model;
      v.params = &params;
      v.before = &s;
      v.after = &out;
      v.chi = chi;
      v.mu = lp.mu;
      v.epsilon = lp.eps;
      v.u = &f.u;
      v.grad_u = &f.grad;
      v.noise_increment = &inc;
      v.noise = &np;
      v.dW = &dW;
      v.row = &row;
      (*opt.observer)(v);
    }
    if (opt.row) *opt.row = row;
  }
  return out;
}

}  // namespace

LedgerRow evaluate_row(const Basis& b, const ConstitutiveModel& model, const NoiseModel& noise,
                       const SolverParams& params, const SolverState& s,
                       const std::vector<GridVector>* profiles) {
  const double R = params.level == SolverLevel::Regularized ? params.R : kInf;
  const Fields f = make_fields(b, s, R);
  const NoiseProjection np = project_noise(b, noise, s.rho, f.u, profiles);
  const double mu = params.level == SolverLevel::Regularized ? params.mu : 0.0;
  const double eps = params.level == SolverLevel::Regularized ? params.epsilon : 0.0;
  return compute_row(b, model, params, mu, eps, s, f, &np);
}

SolverState step_regularized(const SolverState& s, const SolverParams& params,
                             const ConstitutiveModel& model, const NoiseModel& noise,
                             const Basis& b, const StepOptions& opt) {
  return advance(s, params, LevelParams{params.mu, params.epsilon, params.R}, model, noise, b, opt);
}

SolverState step_base(const SolverState& s, const SolverParams& params,
                      const ConstitutiveModel& model, const NoiseModel& noise, const Basis& b,
                      const StepOptions& opt) {
  SolverState out = advance(s, params, LevelParams{}, model, noise, b, opt);
  return stopping_time_update(out, params.guard);
}

SolverState stopping_time_update(const SolverState& s, double guard) {
  SolverState out = s;
  if (!out.stopped && coef_norm(out.c) > guard) {
    out.stopped = true;
    out.tau = out.t;
  }
  return out;
}

std::vector<std::uint32_t> checkpoint_steps(int steps, int checkpoints) {
  std::vector<std::uint32_t> out;
  for (int j = 0; j <= checkpoints; ++j) {
    const auto k = static_cast<std::uint32_t>(std::llround(static_cast<double>(j) * steps / checkpoints));
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

Trajectory solve_path(const SimulationSetup& setup, std::uint64_t seed, std::uint32_t path,
                      const StepObserver* observer) {
  setup.validate();
  const Basis b = build_basis(setup.basis);
  const auto& P = setup.solver;
  const std::vector<GridVector> profiles = noise_profiles(b, setup.noise.active() ? setup.noise.K : 0);
  Trajectory tr;
  tr.seed = seed;
  tr.path = path;
  const RngKey key{seed, path};
  SolverState s = sample_initial_data(setup.initial, b, key);
  s = stopping_time_update(s, P.guard);
  const int steps = P.steps();
  const auto cps = checkpoint_steps(steps, P.checkpoints);
  std::size_t next_cp = 0;
  auto record_checkpoint = [&](std::uint32_t k) {
    if (next_cp < cps.size() && cps[next_cp] == k) {
      tr.checkpoints.push_back({k, s});
      ++next_cp;
    }
  };
  const double R = P.level == SolverLevel::Regularized ? P.R : kInf;
  const double mu = P.level == SolverLevel::Regularized ? P.mu : 0.0;
  const double eps = P.level == SolverLevel::Regularized ? P.epsilon : 0.0;

  for (int k = 0; k < steps; ++k) {
    record_checkpoint(static_cast<std::uint32_t>(k));
    if (s.stopped) {
      // frozen process: state constant, no dissipation or noise increments
      LedgerRow row = compute_row(b, setup.model, P, mu, eps, s, make_fields(b, s, R), nullptr);
      row.dissipation_F = row.dissipation_Fstar = row.stress_power = 0.0;
      row.dissipation_mu = row.dissipation_eps = row.rho_div_u = row.fisher = 0.0;
      tr.ledger.rows.push_back(row);
      s.t += P.dt;
      s.step += 1;
      continue;
    }
    LedgerRow row;
    StepOptions opt;
    opt.profiles = &profiles;
    opt.row = &row;
    opt.observer = observer;
    try {
      SolverState next = P.level == SolverLevel::Regularized
                             ? step_regularized(s, P, setup.model, setup.noise, b, opt)
                             : advance(s, P, LevelParams{}, setup.model, setup.noise, b, opt);
      s = stopping_time_update(next, P.guard);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "t = " << s.t << ": " << e.what();
      tr.failure = msg.str();
      tr.failure_time = s.t;
      return tr;
    }
    tr.ledger.rows.push_back(row);
  }
  record_checkpoint(static_cast<std::uint32_t>(steps));
  LedgerRow last = compute_row(b, setup.model, P, mu, eps, s, make_fields(b, s, R), nullptr);
  tr.ledger.rows.push_back(last);
  tr.stopped = s.stopped;
  tr.tau = s.stopped ? s.tau : P.T;
  return tr;
}

}  // namespace stochflow
