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
#include <cmath>
#include <numbers>

#include "stochflow/diagnostics.hpp"
#include "stochflow/error.hpp"

namespace stochflow {

namespace {

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

TestFunction make_test(const Basis& b, std::string name, int direction, double center, double width,
                       const std::function<double(const std::array<double, 3>&)>& poly) {
  TestFunction tf;
  tf.name = std::move(name);
  tf.direction = direction % b.dim();
  tf.phi.assign(b.grid_size(), 0.0);
  for (std::size_t i = 0; i < b.grid_size(); ++i) {
    const auto g = b.grid_index(i);
    std::array<double, 3> x{0.0, 0.0, 0.0};
    double v = 1.0;
    for (int a = 0; a < b.dim(); ++a) {
      const auto ua = static_cast<std::size_t>(a);
      x[ua] = b.coordinate(a, g[ua]) / b.config().length[ua];
      v *= bump((x[ua] - center) / width);
    }
    tf.phi[i] = v * poly(x);
  }
  GridVector e;
  e.dim = b.dim();
  e.comp.assign(static_cast<std::size_t>(b.dim()), GridScalar(b.grid_size(), 0.0));
  e.comp[static_cast<std::size_t>(tf.direction)] = tf.phi;
  tf.psi = project(b, e);
  return tf;
}

}  // namespace

std::vector<TestFunction> canonical_test_functions(const Basis& b) {
  const int last = b.dim() - 1;
  std::vector<TestFunction> out;
  out.push_back(make_test(b, "bump", 0, 0.5, 0.35, [](const auto&) { return 1.0; }));
  out.push_back(make_test(b, "bump_x0", 1, 0.5, 0.35, [](const auto& x) { return x[0] - 0.5; }));
  out.push_back(make_test(b, "bump_xlast", 2, 0.5, 0.35,
                          [last](const auto& x) { return x[static_cast<std::size_t>(last)] - 0.5 + 0.1; }));
  out.push_back(make_test(b, "bump_cross", 3, 0.4, 0.3, [last](const auto& x) {
    return (x[0] - 0.4) * (x[static_cast<std::size_t>(last)] - 0.35) + 0.01;
  }));
  out.push_back(make_test(b, "bump_quad", 4, 0.6, 0.3,
                          [](const auto& x) { return (x[0] - 0.6) * (x[0] - 0.6) - 0.02; }));
  return out;
}

TestFunction constant_test_function(const Basis& b) {
  TestFunction tf;
  tf.name = "constant";
  tf.phi.assign(b.grid_size(), 1.0);
  tf.psi.c.assign(b.coef_size(), 0.0);
  return tf;
}

WeakFormMonitor::WeakFormMonitor(const Basis& b, const ConstitutiveModel& model,
                                 std::vector<TestFunction> tests, TimeProfile profile, double T)
    : b_(&b), model_(model), tests_(std::move(tests)), profile_(profile), T_(T) {
  const int d = b.dim();
  for (const auto& tf : tests_) {
    check_grid(b, tf.phi, "test function");
    for (int a = 0; a < d; ++a) dphi_.push_back(density_derivative(b, tf.phi, a, Parity::Even));
    lapphi_.push_back(density_laplacian(b, tf.phi));
    gpsi_.push_back(gradient(b, tf.psi));
    psi_grid_.push_back(synthesize(b, tf.psi));
  }
  const std::size_t J = tests_.size();
  acc_c_.assign(J, 0.0);
  acc_m_.assign(J, 0.0);
  acc_noise_.assign(J, 0.0);
}

double WeakFormMonitor::phi_t(double t) const {
  return profile_ == TimeProfile::Constant ? 1.0 : std::cos(0.5 * std::numbers::pi * t / T_);
}

void WeakFormMonitor::pairings(const GridScalar& rho, const ModalVector& c, std::vector<double>& mc,
                               std::vector<double>& mm) const {
  const Basis& b = *b_;
  const GridVector u = synthesize(b, c);
  mc.assign(tests_.size(), 0.0);
  mm.assign(tests_.size(), 0.0);
  GridScalar w(b.grid_size());
  for (std::size_t j = 0; j < tests_.size(); ++j) {
    mc[j] = grid_inner(b, rho, tests_[j].phi);
    double acc = 0.0;
    for (int a = 0; a < b.dim(); ++a) {
      const auto& ua = u.comp[static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho[i] * ua[i];
      acc += grid_inner(b, w, psi_grid_[j].comp[static_cast<std::size_t>(a)]);
    }
    mm[j] = acc;
  }
}

void WeakFormMonitor::on_step(const StepView& v) {
  const Basis& b = *b_;
  const int d = b.dim();
  const std::size_t G = b.grid_size();
  const SolverState& s = *v.before;
  const double dt = v.params->dt;
  const double t = s.t;
  std::vector<double> mc, mm;
  pairings(s.rho, s.c, mc, mm);
  if (!started_) {
    mc0_ = mc;
    mm0_ = mm;
    started_ = true;
  }

  // fluxes of the step
  const GridVector& u = *v.u;
  const GridTensor& gu = *v.grad_u;
  std::vector<GridScalar> drho;
  if (v.epsilon > 0.0)
    for (int k = 0; k < d; ++k) drho.push_back(density_derivative(b, s.rho, k, Parity::Even));
  GridTensor T;
  T.dim = d;
  T.comp.assign(static_cast<std::size_t>(d * d), GridScalar(G, 0.0));
  for (std::size_t i = 0; i < G; ++i) {
    SymTensor D(d);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) D(a, k) = 0.5 * (gu.at(a, k)[i] + gu.at(k, a)[i]);
    const SymTensor S = stress_of_strain(model_, D);
    for (int a = 0; a < d; ++a)
      for (int k = 0; k < d; ++k) {
        const double ua = u.comp[static_cast<std::size_t>(a)][i];
        double val = v.chi * s.rho[i] * ua * u.comp[static_cast<std::size_t>(k)][i] - S(a, k);
        if (v.epsilon > 0.0)
          val -= v.epsilon * (s.rho[i] * gu.at(a, k)[i] + ua * drho[static_cast<std::size_t>(k)][i]);
        T.at(a, k)[i] = val;
      }
  }
  GridScalar hp(G);
  for (std::size_t i = 0; i < G; ++i) hp[i] = pressure_enthalpy(model_, s.rho[i]);
  std::vector<GridScalar> force;
  for (int a = 0; a < d; ++a) {
    GridScalar g = density_derivative(b, hp, a, Parity::Even);
    for (std::size_t i = 0; i < G; ++i) g[i] *= v.chi * s.rho[i];
    force.push_back(std::move(g));
  }
  const std::size_t m = b.scalar_modes();
  GridScalar flux(G);
  for (std::size_t j = 0; j < tests_.size(); ++j) {
    double fc = 0.0;
    for (int a = 0; a < d; ++a) {
      const auto& ua = u.comp[static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < G; ++i) flux[i] = v.chi * s.rho[i] * ua[i];
      fc += grid_inner(b, flux, dphi_[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)]);
    }
    if (v.epsilon > 0.0) fc += v.epsilon * grid_inner(b, s.rho, lapphi_[j]);

    double fm = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int k = 0; k < d; ++k) fm += grid_inner(b, T.at(a, k), gpsi_[j].at(a, k));
      fm -= grid_inner(b, force[static_cast<std::size_t>(a)], psi_grid_[j].comp[static_cast<std::size_t>(a)]);
    }
    if (v.mu > 0.0) {
      const auto& cn = v.after->c.c;
      double acc = 0.0;
      for (std::size_t i = 0; i < cn.size(); ++i) acc += b.trilaplace_eigen()[i % m] * cn[i] * tests_[j].psi.c[i];
      fm -= v.mu * acc;
    }
    double noise = 0.0;
    if (v.noise_increment)
      for (std::size_t i = 0; i < tests_[j].psi.c.size(); ++i) noise += v.noise_increment->c[i] * tests_[j].psi.c[i];

    // rho and rho u held constant over the step against the exact increment of the time profile
    const double ph = phi_t(t), dph = phi_t(v.after->t) - ph;
    acc_c_[j] += dph * mc[j] + dt * ph * fc;
    acc_m_[j] += dph * mm[j] + dt * ph * fm;
    acc_noise_[j] += ph * noise;
  }
  t_last_ = v.after->t;
}

StepObserver WeakFormMonitor::observer() {
  return [this](const StepView& v) { on_step(v); };
}

void WeakFormMonitor::finish(const SolverState& final_state) {
  pairings(final_state.rho, final_state.c, mc_prev_, mm_prev_);
  if (!started_) {
    mc0_ = mc_prev_;
    mm0_ = mm_prev_;
    t_last_ = 0.0;
  }
}

WeakFormPath WeakFormMonitor::result() const {
  WeakFormPath out;
  const double p1 = phi_t(t_last_), p0 = phi_t(0.0);
  for (std::size_t j = 0; j < tests_.size(); ++j) {
    if (!started_) {
      out.continuity.push_back(0.0);
      out.momentum.push_back(0.0);
      out.momentum_no_noise.push_back(0.0);
      continue;
    }
    out.continuity.push_back(p1 * mc_prev_[j] - p0 * mc0_[j] - acc_c_[j]);
    const double mom = p1 * mm_prev_[j] - p0 * mm0_[j] - acc_m_[j];
    out.momentum.push_back(mom - acc_noise_[j]);
    out.momentum_no_noise.push_back(mom);
  }
  return out;
}

WeakFormReport weak_form_residual(const std::vector<WeakFormPath>& paths,
                                  const std::vector<std::string>& names) {
  WeakFormReport rep;
  rep.names = names;
  const std::size_t J = names.size();
  rep.continuity_max.assign(J, 0.0);
  rep.momentum_max.assign(J, 0.0);
  rep.pass = !paths.empty();
  for (std::size_t j = 0; j < J; ++j) {
    std::vector<double> xs;
    for (const auto& p : paths) {
      if (p.continuity.size() != J) fail(ErrorCode::LengthMismatch, "weak-form path has wrong test count");
      rep.continuity_max[j] = std::max(rep.continuity_max[j], std::abs(p.continuity[j]));
      rep.momentum_max[j] = std::max(rep.momentum_max[j], std::abs(p.momentum[j]));
      xs.push_back(p.momentum_no_noise[j]);
    }
    rep.momentum_mean.push_back(mean_ci(xs));
    const auto& mc = rep.momentum_mean.back();
    if (!(std::abs(mc.mean) <= 4.0 * mc.se + kWeakFormFloor)) rep.pass = false;
  }
  return rep;
}

}  // namespace stochflow
