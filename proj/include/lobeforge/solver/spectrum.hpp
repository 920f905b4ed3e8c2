#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <vector>

#include "lobeforge/shell/energy.hpp"
#include "lobeforge/solver/constraints.hpp"

namespace lobeforge {

// What to do when the constraints leave rigid-body motions unconstrained.
enum class RigidModePolicy { Error, Allow, Deflate };

struct EigenOptions {
  int max_iterations = 400;  // bisection step cap
  double tol = 1e-10;        // interval width relative to the spectrum scale
  RigidModePolicy policy = RigidModePolicy::Error;
  int threads = 1;
};

namespace detail {

// Rigid-motion velocity fields (3 translations, 3 rotations about the
// centroid) evaluated at the given configuration, as columns.
inline Eigen::MatrixXd rigid_basis(const Configuration& x) {
  int n = static_cast<int>(x.size()) / 3;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int v = 0; v < n; ++v) c += x.segment<3>(3 * v);
  c /= n;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(3 * n, 6);
  for (int v = 0; v < n; ++v) {
    for (int d = 0; d < 3; ++d) basis(3 * v + d, d) = 1.0;
    Eigen::Vector3d r = x.segment<3>(3 * v) - c;
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d omega = Eigen::Vector3d::Unit(axis);
      basis.block<3, 1>(3 * v, 3 + axis) = omega.cross(r);
    }
  }
  return basis;
}

struct InertiaCount {
  int negatives = 0;
  bool reliable = false;
};

// Number of negative pivots of an LDL^T factorization, equal to the number
// of negative eigenvalues by Sylvester's law of inertia. The count is
// flagged unreliable when a pivot is negligibly small: the factorization
// has no pivoting, so a near-singular shift can corrupt later pivots.
inline InertiaCount negative_pivots(const Eigen::SparseMatrix<double>& mat) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt(mat);
  InertiaCount count;
  if (ldlt.info() != Eigen::Success) return count;
  Eigen::VectorXd d = ldlt.vectorD();
  double dmax = 0.0;
  for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d(i)));
  count.reliable = dmax > 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) < 0.0) ++count.negatives;
    if (std::abs(d(i)) <= 1e-13 * dmax) count.reliable = false;
  }
  return count;
}

}  // namespace detail

// Smallest eigenvalue of the constrained stiffness (Hessian) at x, in
// N/mm. Positive means the equilibrium is stable against all admissible
// perturbations. Found by bisection on the eigenvalue count below a shift,
// read off the inertia of the shifted factorization; unlike iterative
// solvers this is insensitive to clustering at the low end of the
// spectrum. Under the Deflate policy the count is taken from a bordered
// matrix that adds a rank-k penalty on the surviving rigid modes without
// densifying the system.
inline double min_stiffness_eigenvalue(const ShellModel& shell, const Configuration& x,
                                       const Constraints& constraints,
                                       const EigenOptions& options = {}) {
  ReducedSystem red = build_reduced_system(constraints, x);
  require(red.m > 0, ErrorCode::ConstraintConflict, "no free degrees of freedom");
  Eigen::SparseMatrix<double> h = energy_hessian(shell, x, options.threads);
  Eigen::SparseMatrix<double> hq = (red.s.transpose() * h * red.s).pruned(1.0, 1e-300);
  int m = red.m;

  // Rigid motions that keep every constraint satisfied survive into the
  // reduced space and make the raw smallest eigenvalue meaningless.
  Eigen::MatrixXd rigid = detail::rigid_basis(x);
  Eigen::MatrixXd constrained_rows(constraints.constrained_dof_count(), 6);
  int row = 0;
  for (int vtx : constraints.fixed)
    for (int d = 0; d < 3; ++d) constrained_rows.row(row++) = rigid.row(3 * vtx + d);
  for (const auto& p : constraints.prescribed) {
    Eigen::Vector3d a = p.axis.normalized();
    constrained_rows.row(row++) = a(0) * rigid.row(3 * p.vertex + 0) +
                                  a(1) * rigid.row(3 * p.vertex + 1) +
                                  a(2) * rigid.row(3 * p.vertex + 2);
  }
  Eigen::MatrixXd surviving;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        constrained_rows.rows() > 0 ? constrained_rows : Eigen::MatrixXd::Zero(1, 6),
        Eigen::ComputeFullV);
    double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    std::vector<int> null_cols;
    for (int i = 0; i < 6; ++i) {
      double s = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
      if (s <= 1e-8 * std::max(smax, 1.0)) null_cols.push_back(i);
    }
    surviving.resize(rigid.rows(), null_cols.size());
    for (size_t i = 0; i < null_cols.size(); ++i)
      surviving.col(i) = rigid * svd.matrixV().col(null_cols[i]);
  }

  int k = 0;
  Eigen::MatrixXd qmat;
  if (surviving.cols() > 0) {
    switch (options.policy) {
      case RigidModePolicy::Error:
        fail(ErrorCode::ConstraintConflict,
             "rigid-body modes are unconstrained; use Allow or Deflate policy");
      case RigidModePolicy::Allow:
        break;
      case RigidModePolicy::Deflate: {
        Eigen::MatrixXd reduced_modes = red.s.transpose() * surviving;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(reduced_modes);
        qmat = qr.householderQ() *
               Eigen::MatrixXd::Identity(m, static_cast<int>(reduced_modes.cols()));
        k = static_cast<int>(qmat.cols());
        require(m > k, ErrorCode::ConstraintConflict,
                "only rigid-body modes remain after deflation");
        break;
      }
    }
  }

  // Gershgorin bounds bracket every eigenvalue of the reduced Hessian.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd radius = Eigen::VectorXd::Zero(m);
  for (int col = 0; col < hq.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(hq, col); it; ++it) {
      if (it.row() == it.col())
        diag(it.row()) = it.value();
      else
        radius(it.row()) += std::abs(it.value());
    }
  }
  double lo = (diag - radius).minCoeff();
  double hi = (diag + radius).maxCoeff();
  double scale = std::max({std::abs(lo), std::abs(hi), 1e-30});
  double penalty = 4.0 * scale;  // pushes deflated modes above the bracket

  // Number of eigenvalues strictly below sigma, from the inertia of the
  // shifted matrix. With deflation active, the bordered matrix
  //   [ H - sigma I   Q          ]
  //   [ Q^T           -I_k / pen ]
  // has k extra negative pivots beyond those of H - sigma I + pen Q Q^T
  // (Haynsworth inertia additivity over the Schur complement).
  auto count_below = [&](double sigma) -> detail::InertiaCount {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(hq.nonZeros() + static_cast<size_t>(2 * m * k + k + m));
    for (int col = 0; col < hq.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(hq, col); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < m; ++i) trips.emplace_back(i, i, -sigma);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < m; ++i) {
        trips.emplace_back(i, m + j, qmat(i, j));
        trips.emplace_back(m + j, i, qmat(i, j));
      }
      trips.emplace_back(m + j, m + j, -1.0 / penalty);
    }
    Eigen::SparseMatrix<double> shifted(m + k, m + k);
    shifted.setFromTriplets(trips.begin(), trips.end());
    detail::InertiaCount count = detail::negative_pivots(shifted);
    count.negatives -= k;
    return count;
  };

  double a = lo - 1e-6 * scale;
  double b = hi + 1e-6 * scale;
  int iterations = 0;
  while (b - a > options.tol * scale) {
    require(iterations++ < options.max_iterations, ErrorCode::EigenIterationFailure,
            "eigenvalue bisection exceeded the iteration cap");
    double sigma = 0.5 * (a + b);
    detail::InertiaCount count = count_below(sigma);
    // A shift that lands on an eigenvalue breaks the unpivoted
    // factorization; step off it by a growing fraction of the interval.
    for (int attempt = 1; !count.reliable && attempt <= 8; ++attempt) {
      double step = (b - a) * 1e-3 * ((attempt + 1) / 2);
      double nudged = sigma + (attempt % 2 == 1 ? step : -step);
      if (nudged <= a || nudged >= b) continue;
      sigma = nudged;
      count = count_below(sigma);
    }
    if (count.negatives >= 1)
      b = sigma;
    else
      a = sigma;
  }
  return 0.5 * (a + b);
}

}  // namespace lobeforge
