#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <limits>

#include "lobeforge/shell/energy.hpp"
#include "lobeforge/solver/constraints.hpp"

namespace lobeforge {

struct SolverOptions {
  double gradient_tol = 1e-6;  // N, infinity norm of the reduced gradient
  int max_iterations = 200;
  int threads = 1;
};

struct EquilibriumState {
  Configuration x;
  double energy = 0.0;
  double gradient_inf_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

// Damped Newton minimization of the elastic energy over the reduced
// coordinates. Indefinite Hessians fall back to a growing diagonal shift
// (Levenberg style) and ultimately to steepest descent; steps are accepted
// under an Armijo backtracking test on the total energy.
inline EquilibriumState find_equilibrium(const ShellModel& shell,
                                         const Configuration& initial,
                                         const Constraints& constraints,
                                         const SolverOptions& options = {}) {
  require(initial.size() == shell.dof_count(), ErrorCode::RangeError,
          "initial configuration size mismatch");
  require(initial.allFinite(), ErrorCode::NonPhysical, "non-finite initial configuration");
  ReducedSystem red = build_reduced_system(constraints, initial);
  require(red.m > 0, ErrorCode::ConstraintConflict, "no free degrees of freedom");

  Eigen::VectorXd q = red.project(initial);
  Configuration x = red.expand(q);
  double energy = total_energy(shell, x, options.threads);

  EquilibriumState state;
  Eigen::SparseMatrix<double> identity(red.m, red.m);
  identity.setIdentity();

  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::VectorXd g = energy_gradient(shell, x, options.threads);
    Eigen::VectorXd gq = red.s.transpose() * g;
    double gnorm = gq.size() > 0 ? gq.cwiseAbs().maxCoeff() : 0.0;
    state.iterations = it;
    state.gradient_inf_norm = gnorm;
    if (gnorm <= options.gradient_tol) {
      state.converged = true;
      break;
    }

    Eigen::SparseMatrix<double> h = energy_hessian(shell, x, options.threads);
    Eigen::SparseMatrix<double> hq =
        (red.s.transpose() * h * red.s).pruned(1.0, 1e-300);
    double dscale = 0.0;
    for (int i = 0; i < red.m; ++i) dscale += std::abs(hq.coeff(i, i));
    dscale = std::max(dscale / red.m, 1e-12);

    Eigen::VectorXd d;
    bool have_direction = false;
    double tau = 0.0;
    for (int attempt = 0; attempt < 40 && !have_direction; ++attempt) {
      Eigen::SparseMatrix<double> shifted = hq;
      if (tau > 0.0) shifted = hq + tau * identity;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
      if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) {
        d = ldlt.solve(-gq);
        if (d.allFinite() && gq.dot(d) < 0.0) have_direction = true;
      }
      if (!have_direction) {
        tau = tau == 0.0 ? 1e-8 * dscale : tau * 10.0;
        if (tau > 1e10 * dscale) break;
      }
    }
    if (!have_direction) d = -gq;  // steepest descent fallback

    double slope = gq.dot(d);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Configuration x_try = red.expand(q + step * d);
      double e_try = total_energy(shell, x_try, options.threads);
      if (e_try <= energy + 1e-4 * step * slope) {
        q += step * d;
        x = x_try;
        energy = e_try;
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < 1e-14) break;
    }
    if (!accepted && have_direction) {
      // Newton step unusable; retry once along the raw gradient.
      d = -gq;
      slope = gq.dot(d);
      step = std::min(1.0, 1.0 / std::max(1.0, gq.norm()));
      for (int ls = 0; ls < 60; ++ls) {
        Configuration x_try = red.expand(q + step * d);
        double e_try = total_energy(shell, x_try, options.threads);
        if (e_try <= energy + 1e-4 * step * slope) {
          q += step * d;
          x = x_try;
          energy = e_try;
          accepted = true;
          break;
        }
        step *= 0.5;
        if (step < 1e-14) break;
      }
    }
    if (!accepted) break;  // line search stalled, report best state
  }

  if (!state.converged) {
    Eigen::VectorXd g = energy_gradient(shell, x, options.threads);
    state.gradient_inf_norm = (red.s.transpose() * g).cwiseAbs().maxCoeff();
    state.converged = state.gradient_inf_norm <= options.gradient_tol;
  }
  state.x = x;
  state.energy = energy;
  return state;
}

// Net constraint force transmitted through the prescribed vertices along
// their axes: the reading of a load cell driving the prescription.
inline double axial_reaction(const ShellModel& shell, const Configuration& x,
                             const std::vector<AxialPrescription>& prescribed,
                             int threads = 1) {
  Eigen::VectorXd g = energy_gradient(shell, x, threads);
  double force = 0.0;
  for (const auto& p : prescribed)
    force += p.axis.normalized().dot(g.segment<3>(3 * p.vertex));
  return force;
}

}  // namespace lobeforge
