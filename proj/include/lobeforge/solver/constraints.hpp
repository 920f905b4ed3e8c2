#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <set>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/shell/shell_model.hpp"

namespace lobeforge {

// Single-axis prescription: the vertex coordinate along `axis` is pinned to
// `target`, motion in the orthogonal plane stays free.
struct AxialPrescription {
  int vertex = -1;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double target = 0.0;
};

struct Constraints {
  std::vector<int> fixed;
  std::vector<AxialPrescription> prescribed;

  int constrained_dof_count() const {
    return 3 * static_cast<int>(fixed.size()) + static_cast<int>(prescribed.size());
  }
};

// Linear change of variables x = S q + b eliminating constrained degrees of
// freedom. Columns of S are orthonormal, so q = S^T (x - b) projects any
// configuration onto the constraint manifold.
struct ReducedSystem {
  Eigen::SparseMatrix<double> s;  // 3n x m
  Eigen::VectorXd b;              // 3n
  int m = 0;

  Eigen::VectorXd project(const Configuration& x) const {
    return s.transpose() * (x - b);
  }
  Configuration expand(const Eigen::VectorXd& q) const { return s * q + b; }
};

inline void validate_constraints(const Constraints& constraints, int n_vertices) {
  std::set<int> seen;
  for (int v : constraints.fixed) {
    require(v >= 0 && v < n_vertices, ErrorCode::RangeError, "fixed vertex out of range");
    require(seen.insert(v).second, ErrorCode::ConstraintConflict,
            "vertex constrained twice");
  }
  for (const auto& p : constraints.prescribed) {
    require(p.vertex >= 0 && p.vertex < n_vertices, ErrorCode::RangeError,
            "prescribed vertex out of range");
    require(seen.insert(p.vertex).second, ErrorCode::ConstraintConflict,
            "vertex constrained twice");
    require(p.axis.norm() > 1e-12, ErrorCode::ConstraintConflict,
            "prescription axis is zero");
    require(std::isfinite(p.target), ErrorCode::RangeError, "non-finite target");
  }
}

// anchor supplies the positions held by fully fixed vertices.
inline ReducedSystem build_reduced_system(const Constraints& constraints,
                                          const Configuration& anchor) {
  int n3 = static_cast<int>(anchor.size());
  validate_constraints(constraints, n3 / 3);
  enum class Kind { Free, Fixed, Axial };
  std::vector<Kind> kind(n3 / 3, Kind::Free);
  std::vector<int> axial_index(n3 / 3, -1);
  for (int v : constraints.fixed) kind[v] = Kind::Fixed;
  for (size_t i = 0; i < constraints.prescribed.size(); ++i) {
    kind[constraints.prescribed[i].vertex] = Kind::Axial;
    axial_index[constraints.prescribed[i].vertex] = static_cast<int>(i);
  }

  ReducedSystem red;
  red.b = Eigen::VectorXd::Zero(n3);
  std::vector<Eigen::Triplet<double>> trips;
  int col = 0;
  for (int v = 0; v < n3 / 3; ++v) {
    switch (kind[v]) {
      case Kind::Free:
        for (int d = 0; d < 3; ++d) trips.emplace_back(3 * v + d, col++, 1.0);
        break;
      case Kind::Fixed:
        red.b.segment<3>(3 * v) = anchor.segment<3>(3 * v);
        break;
      case Kind::Axial: {
        const AxialPrescription& p = constraints.prescribed[axial_index[v]];
        Eigen::Vector3d a = p.axis.normalized();
        Eigen::Vector3d seed = std::abs(a.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                     : Eigen::Vector3d::UnitY();
        Eigen::Vector3d b1 = (seed - seed.dot(a) * a).normalized();
        Eigen::Vector3d b2 = a.cross(b1);
        for (int d = 0; d < 3; ++d) {
          trips.emplace_back(3 * v + d, col, b1(d));
          trips.emplace_back(3 * v + d, col + 1, b2(d));
        }
        col += 2;
        red.b.segment<3>(3 * v) = p.target * a;
        break;
      }
    }
  }
  red.m = col;
  red.s.resize(n3, col);
  red.s.setFromTriplets(trips.begin(), trips.end());
  return red;
}

}  // namespace lobeforge
