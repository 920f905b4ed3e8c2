#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "lobeforge/core/parallel.hpp"
#include "lobeforge/shell/shell_model.hpp"

namespace lobeforge {
namespace detail {

template <class T, size_t N>
void gather(const Configuration& x, const std::array<int, N>& ids, V3<T> out[N]) {
  for (size_t k = 0; k < N; ++k)
    for (int d = 0; d < 3; ++d) out[k][d] = T(x(3 * ids[k] + d));
}

}  // namespace detail

// Total elastic energy in mJ. Partial sums are accumulated per fixed-size
// chunk and reduced in chunk order, so the value is independent of the
// thread count.
inline double total_energy(const ShellModel& shell, const Configuration& x,
                           int threads = 1) {
  require(x.size() == shell.dof_count(), ErrorCode::RangeError,
          "configuration size mismatch");
  require(x.allFinite(), ErrorCode::NonPhysical, "non-finite configuration");
  int n_mem = static_cast<int>(shell.membrane.size());
  int n_bend = static_cast<int>(shell.bending.size());
  std::vector<double> mem_sums((n_mem + kParallelChunk - 1) / kParallelChunk, 0.0);
  std::vector<double> bend_sums((n_bend + kParallelChunk - 1) / kParallelChunk, 0.0);
  parallel_chunks(n_mem, threads, [&](int begin, int end) {
    double acc = 0.0;
    detail::V3<double> xe[3], ge[3];
    for (int e = begin; e < end; ++e) {
      detail::gather(x, shell.membrane[e].v, xe);
      acc += detail::membrane_energy_gradient(shell.membrane[e], shell.material.poisson,
                                              xe, ge);
    }
    mem_sums[begin / kParallelChunk] += acc;
  });
  parallel_chunks(n_bend, threads, [&](int begin, int end) {
    double acc = 0.0;
    detail::V3<double> xe[4], ge[4];
    for (int e = begin; e < end; ++e) {
      detail::gather(x, shell.bending[e].v, xe);
      acc += detail::bending_energy_gradient(shell.bending[e], xe, ge);
    }
    bend_sums[begin / kParallelChunk] += acc;
  });
  double total = 0.0;
  for (double s : mem_sums) total += s;
  for (double s : bend_sums) total += s;
  return total;
}

// Analytic gradient of total_energy, units N. Per-element gradients are
// computed in parallel into element-owned slots and scattered serially in
// fixed element order.
inline Eigen::VectorXd energy_gradient(const ShellModel& shell, const Configuration& x,
                                       int threads = 1) {
  require(x.size() == shell.dof_count(), ErrorCode::RangeError,
          "configuration size mismatch");
  require(x.allFinite(), ErrorCode::NonPhysical, "non-finite configuration");
  int n_mem = static_cast<int>(shell.membrane.size());
  int n_bend = static_cast<int>(shell.bending.size());
  std::vector<std::array<detail::V3<double>, 3>> mem_grads(n_mem);
  std::vector<std::array<detail::V3<double>, 4>> bend_grads(n_bend);
  parallel_chunks(n_mem, threads, [&](int begin, int end) {
    detail::V3<double> xe[3];
    for (int e = begin; e < end; ++e) {
      detail::gather(x, shell.membrane[e].v, xe);
      detail::membrane_energy_gradient(shell.membrane[e], shell.material.poisson, xe,
                                       mem_grads[e].data());
    }
  });
  parallel_chunks(n_bend, threads, [&](int begin, int end) {
    detail::V3<double> xe[4];
    for (int e = begin; e < end; ++e) {
      detail::gather(x, shell.bending[e].v, xe);
      detail::bending_energy_gradient(shell.bending[e], xe, bend_grads[e].data());
    }
  });
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int e = 0; e < n_mem; ++e)
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d)
        g(3 * shell.membrane[e].v[k] + d) += mem_grads[e][k][d];
  for (int e = 0; e < n_bend; ++e)
    for (int k = 0; k < 4; ++k)
      for (int d = 0; d < 3; ++d)
        g(3 * shell.bending[e].v[k] + d) += bend_grads[e][k][d];
  return g;
}

// Element Hessians by forward-mode differentiation of the analytic element
// gradients, symmetrized. Triplets are emitted in fixed element order so the
// assembled sparse matrix is reproducible bit for bit.
inline void energy_hessian_triplets(const ShellModel& shell, const Configuration& x,
                                    int threads,
                                    std::vector<Eigen::Triplet<double>>& triplets) {
  require(x.size() == shell.dof_count(), ErrorCode::RangeError,
          "configuration size mismatch");
  int n_mem = static_cast<int>(shell.membrane.size());
  int n_bend = static_cast<int>(shell.bending.size());
  using Block9 = Eigen::Matrix<double, 9, 9>;
  using Block12 = Eigen::Matrix<double, 12, 12>;
  std::vector<Block9> mem_blocks(n_mem);
  std::vector<Block12> bend_blocks(n_bend);

  parallel_chunks(n_mem, threads, [&](int begin, int end) {
    detail::V3<Dual> xe[3], ge[3];
    for (int e = begin; e < end; ++e) {
      const MembraneElement& el = shell.membrane[e];
      Block9 h;
      for (int j = 0; j < 9; ++j) {
        detail::gather(x, el.v, xe);
        xe[j / 3][j % 3].b = 1.0;
        detail::membrane_energy_gradient(el, shell.material.poisson, xe, ge);
        for (int i = 0; i < 9; ++i) h(i, j) = ge[i / 3][i % 3].b;
      }
      mem_blocks[e] = 0.5 * (h + h.transpose());
    }
  });
  parallel_chunks(n_bend, threads, [&](int begin, int end) {
    detail::V3<Dual> xe[4], ge[4];
    for (int e = begin; e < end; ++e) {
      const BendingElement& el = shell.bending[e];
      Block12 h;
      for (int j = 0; j < 12; ++j) {
        detail::gather(x, el.v, xe);
        xe[j / 3][j % 3].b = 1.0;
        detail::bending_energy_gradient(el, xe, ge);
        for (int i = 0; i < 12; ++i) h(i, j) = ge[i / 3][i % 3].b;
      }
      bend_blocks[e] = 0.5 * (h + h.transpose());
    }
  });

  triplets.clear();
  triplets.reserve(n_mem * 81 + n_bend * 144);
  for (int e = 0; e < n_mem; ++e) {
    const auto& v = shell.membrane[e].v;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j)
        triplets.emplace_back(3 * v[i / 3] + i % 3, 3 * v[j / 3] + j % 3,
                              mem_blocks[e](i, j));
  }
  for (int e = 0; e < n_bend; ++e) {
    const auto& v = shell.bending[e].v;
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        triplets.emplace_back(3 * v[i / 3] + i % 3, 3 * v[j / 3] + j % 3,
                              bend_blocks[e](i, j));
  }
}

inline Eigen::SparseMatrix<double> energy_hessian(const ShellModel& shell,
                                                  const Configuration& x,
                                                  int threads = 1) {
  std::vector<Eigen::Triplet<double>> triplets;
  energy_hessian_triplets(shell, x, threads, triplets);
  Eigen::SparseMatrix<double> h(shell.dof_count(), shell.dof_count());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

// Largest absolute principal engineering strain over all triangles
// (principal stretch minus one, from the right Cauchy-Green eigenvalues).
inline double max_abs_strain(const ShellModel& shell, const Configuration& x) {
  double worst = 0.0;
  for (const auto& el : shell.membrane) {
    Eigen::Vector3d x0 = config_position(x, el.v[0]);
    Eigen::Vector3d d1 = config_position(x, el.v[1]) - x0;
    Eigen::Vector3d d2 = config_position(x, el.v[2]) - x0;
    Eigen::Matrix<double, 3, 2> ds;
    ds.col(0) = d1;
    ds.col(1) = d2;
    Eigen::Matrix<double, 3, 2> f = ds * el.bm_inv;
    Eigen::Matrix2d c = f.transpose() * f;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
    for (int k = 0; k < 2; ++k) {
      double stretch = std::sqrt(std::max(0.0, es.eigenvalues()(k)));
      worst = std::max(worst, std::abs(stretch - 1.0));
    }
  }
  return worst;
}

}  // namespace lobeforge
