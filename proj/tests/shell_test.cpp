#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lobeforge/core/rng.hpp"
#include "lobeforge/geometry/atl.hpp"
#include "lobeforge/geometry/thickness.hpp"
#include "lobeforge/geometry/triangulate.hpp"
#include "lobeforge/material.hpp"
#include "lobeforge/shell/energy.hpp"
#include "lobeforge/shell/shell_model.hpp"

namespace lobeforge {
namespace {

TriMesh small_lobe_mesh(double target_edge = 4.0) {
  LobeContour contour = make_lobe_contour();
  contour.tab = TabSpec{};
  SurfacePatch patch = generate_atl_surface(contour, EllipsoidSpec{});
  TriangulateOptions opt;
  opt.target_edge = target_edge;
  TriMesh mesh = triangulate(patch, opt);
  return assign_thickness(mesh, ThicknessField::constant(0.93));
}

// Two coplanar triangles sharing the edge (0,0,0)-(1,0,0); flap A above,
// flap B below. Winding is counter-clockwise seen from +z.
TriMesh flat_hinge_pair(double thickness = 0.5) {
  TriMesh mesh;
  mesh.positions = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.5, 1.0, 0.0}, {0.5, -1.0, 0.0}};
  mesh.triangles = {{0, 1, 2}, {1, 0, 3}};
  mesh.thickness.assign(4, thickness);
  mesh.tags.assign(4, kTagNone);
  mesh.apex = 2;
  return mesh;
}

Eigen::VectorXd fd_gradient(const ShellModel& shell, const Configuration& x, double h) {
  Eigen::VectorXd g(x.size());
  Configuration xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    double ep = total_energy(shell, xp);
    xp(i) = x(i) - h;
    double em = total_energy(shell, xp);
    xp(i) = x(i);
    g(i) = (ep - em) / (2.0 * h);
  }
  return g;
}

TEST(Material, SecantFitUsesSmallestStrainPoint) {
  Material m = default_material();
  EXPECT_DOUBLE_EQ(m.youngs_modulus, 40.0);
  EXPECT_DOUBLE_EQ(m.poisson, 0.45);
  EXPECT_DOUBLE_EQ(m.density, 1.16);
  Material shuffled = fit_material({{0.5, 9.0}, {0.05, 2.0}});
  EXPECT_DOUBLE_EQ(shuffled.youngs_modulus, 40.0);
}

TEST(Material, RejectsEmptyAndNonPhysical) {
  try {
    fit_material({});
    FAIL() << "expected EmptyDatasheet";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDatasheet);
  }
  try {
    fit_material(default_datasheet(), 0.6);
    FAIL() << "expected NonPhysical";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPhysical);
  }
}

TEST(ShellEnergy, GradientMatchesFiniteDifference) {
  TriMesh mesh = small_lobe_mesh();
  ShellModel shell = build_shell(mesh, default_material());
  SplitMix64 rng(7);
  Configuration x = configuration_from_mesh(mesh);
  for (int i = 0; i < x.size(); ++i) x(i) += 0.15 * (rng.uniform() - 0.5);

  Eigen::VectorXd g = energy_gradient(shell, x);
  Eigen::VectorXd g_fd = fd_gradient(shell, x, 1e-6);
  double rel = (g - g_fd).norm() / g_fd.norm();
  EXPECT_LT(rel, 1e-6);
}

TEST(ShellEnergy, HessianMatchesGradientDifference) {
  TriMesh mesh = small_lobe_mesh(5.0);
  ShellModel shell = build_shell(mesh, default_material());
  SplitMix64 rng(11);
  Configuration x = configuration_from_mesh(mesh);
  for (int i = 0; i < x.size(); ++i) x(i) += 0.1 * (rng.uniform() - 0.5);

  Eigen::SparseMatrix<double> h = energy_hessian(shell, x);
  double h_step = 1e-6;
  double worst = 0.0;
  Configuration xp = x;
  for (int j = 0; j < x.size(); j += 7) {  // sampled columns keep the test fast
    xp(j) = x(j) + h_step;
    Eigen::VectorXd gp = energy_gradient(shell, xp);
    xp(j) = x(j) - h_step;
    Eigen::VectorXd gm = energy_gradient(shell, xp);
    xp(j) = x(j);
    Eigen::VectorXd col_fd = (gp - gm) / (2.0 * h_step);
    Eigen::VectorXd col = h.col(j);
    worst = std::max(worst, (col - col_fd).norm() / std::max(1.0, col_fd.norm()));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(ShellEnergy, FrameInvarianceAndForceBalance) {
  TriMesh mesh = small_lobe_mesh();
  ShellModel shell = build_shell(mesh, default_material());
  SplitMix64 rng(13);
  Configuration x = configuration_from_mesh(mesh);
  for (int i = 0; i < x.size(); ++i) x(i) += 0.2 * (rng.uniform() - 0.5);
  double e0 = total_energy(shell, x);
  Eigen::VectorXd g0 = energy_gradient(shell, x);

  Eigen::Vector3d force_sum = Eigen::Vector3d::Zero();
  for (int v = 0; v < mesh.vertex_count(); ++v) force_sum += g0.segment<3>(3 * v);
  EXPECT_LT(force_sum.norm(), 1e-9);

  for (int trial = 0; trial < 5; ++trial) {
    Eigen::Matrix3d r = rng.rotation();
    Eigen::Vector3d t(rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0),
                      rng.uniform(-50.0, 50.0));
    Configuration y(x.size());
    for (int v = 0; v < mesh.vertex_count(); ++v)
      y.segment<3>(3 * v) = r * x.segment<3>(3 * v) + t;
    double e1 = total_energy(shell, y);
    EXPECT_LT(std::abs(e1 - e0) / std::max(1.0, std::abs(e0)), 1e-10);
    Eigen::VectorXd g1 = energy_gradient(shell, y);
    double rot_err = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
      rot_err = std::max(rot_err,
                         (g1.segment<3>(3 * v) - r * g0.segment<3>(3 * v)).norm());
    EXPECT_LT(rot_err, 1e-10 * std::max(1.0, g0.norm()));
  }
}

TEST(ShellEnergy, UniformStretchMatchesClosedForm) {
  TriMesh mesh;
  mesh.positions = {{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}, {1.0, 1.7, 0.0}};
  mesh.triangles = {{0, 1, 2}};
  mesh.thickness.assign(3, 0.8);
  mesh.tags.assign(3, kTagNone);
  mesh.apex = 0;
  Material mat;
  mat.youngs_modulus = 40.0;
  mat.poisson = 0.45;
  ShellModel shell = build_shell(mesh, mat);

  double lambda = 1.05;
  Configuration x = lambda * configuration_from_mesh(mesh);
  double area = triangle_area(mesh.positions[0], mesh.positions[1], mesh.positions[2]);
  double km = 40.0 * 0.8 / (1.0 - 0.45 * 0.45);
  double strain = 0.5 * (lambda * lambda - 1.0);
  // Both principal Green strains equal under isotropic in-plane stretch.
  double lam_t = km * 0.45, mu_t = km * (1.0 - 0.45) / 2.0;
  double expected = area * (0.5 * lam_t * 4.0 * strain * strain + mu_t * 2.0 * strain * strain);
  EXPECT_NEAR(total_energy(shell, x), expected, 1e-10 * expected);
}

TEST(ShellEnergy, HingeFoldMatchesClosedForm) {
  TriMesh mesh = flat_hinge_pair();
  Material mat = default_material();
  ShellModel shell = build_shell(mesh, mat);
  ASSERT_EQ(shell.bending.size(), 1u);
  const BendingElement& el = shell.bending[0];
  EXPECT_NEAR(el.rest_psi, 0.0, 1e-12);

  double expected_k = 40.0 * std::pow(0.5, 3) / (12.0 * (1.0 - 0.45 * 0.45)) * 1.0 /
                      (2.0 * (0.5 + 0.5));
  EXPECT_NEAR(el.stiffness, expected_k, 1e-12 * expected_k);

  // Fold flap B downward about the shared edge: ridge on the normal side.
  double theta = 0.3;
  Configuration x = configuration_from_mesh(mesh);
  x.segment<3>(3 * 3) = Eigen::Vector3d(0.5, -std::cos(theta), -std::sin(theta));
  detail::V3<double> xe[4];
  for (int k = 0; k < 4; ++k)
    for (int d = 0; d < 3; ++d) xe[k][d] = x(3 * el.v[k] + d);
  EXPECT_NEAR(detail::dihedral_psi(xe), theta, 1e-12);
  EXPECT_NEAR(total_energy(shell, x), el.stiffness * theta * theta,
              1e-10 * el.stiffness);
}

TEST(ShellEnergy, StiffnessScalesWithThickness) {
  ShellModel thin = build_shell(flat_hinge_pair(0.4), default_material());
  ShellModel thick = build_shell(flat_hinge_pair(0.8), default_material());
  EXPECT_NEAR(thick.bending[0].stiffness / thin.bending[0].stiffness, 8.0, 1e-12);
  EXPECT_NEAR(thick.membrane[0].km / thin.membrane[0].km, 2.0, 1e-12);
}

TEST(ShellEnergy, MaxStrainReportsImposedStretch) {
  TriMesh mesh = flat_hinge_pair();
  ShellModel shell = build_shell(mesh, default_material());
  Configuration x = 1.08 * configuration_from_mesh(mesh);
  EXPECT_NEAR(max_abs_strain(shell, x), 0.08, 1e-12);
}

TEST(Actuation, ZeroIsIdentity) {
  ShellModel shell = build_shell(small_lobe_mesh(5.0), default_material());
  ShellModel same = apply_layer_actuation(shell, ActuationState{});
  for (size_t e = 0; e < shell.bending.size(); ++e)
    EXPECT_EQ(same.bending[e].rest_psi, shell.bending[e].rest_psi);
  for (size_t e = 0; e < shell.membrane.size(); ++e)
    EXPECT_EQ(same.membrane[e].bm_inv, shell.membrane[e].bm_inv);
}

TEST(Actuation, EqualLayerStrainsKeepMetric) {
  ShellModel shell = build_shell(flat_hinge_pair(), default_material());
  ActuationState act;
  act.alpha_out = 0.04;
  act.inner_ratio = 1.0;  // inner contracts as much as outer expands
  ShellModel out = apply_layer_actuation(shell, act);
  EXPECT_EQ(out.membrane[0].bm_inv, shell.membrane[0].bm_inv);
  double kappa_bar = (0.04 + 0.04) / 0.5;
  EXPECT_NEAR(out.bending[0].rest_psi,
              shell.bending[0].rest_psi - kappa_bar * shell.bending[0].rest_lever, 1e-12);
}

TEST(Actuation, MidsurfaceStretchScalesRestMetric) {
  ShellModel shell = build_shell(flat_hinge_pair(), default_material());
  ActuationState act;
  act.alpha_out = 0.05;
  act.inner_ratio = 0.2;
  ShellModel out = apply_layer_actuation(shell, act);
  double s = 1.0 + (0.05 - 0.2 * 0.05) / 2.0;
  Eigen::Matrix2d expected = shell.membrane[0].bm_inv / s;
  EXPECT_LT((out.membrane[0].bm_inv - expected).norm(), 1e-14);
  EXPECT_NEAR(out.membrane[0].area, shell.membrane[0].area * s * s, 1e-14);
}

TEST(Actuation, PrestressScalesRestDihedrals) {
  TriMesh mesh = small_lobe_mesh(5.0);
  ShellModel shell = build_shell(mesh, default_material());
  ShellModel flattened = apply_prestress(shell, 1.0);
  for (const auto& el : flattened.bending) EXPECT_EQ(el.rest_psi, 0.0);
  ShellModel partial = apply_prestress(shell, 0.35);
  for (size_t e = 0; e < shell.bending.size(); ++e)
    EXPECT_NEAR(partial.bending[e].rest_psi, 0.65 * shell.bending[e].rest_psi, 1e-15);
  EXPECT_THROW(apply_prestress(shell, 2.5), Error);
}

TEST(ShellEnergy, ThreadCountDoesNotChangeResults) {
  TriMesh mesh = small_lobe_mesh(3.0);
  ShellModel shell = build_shell(mesh, default_material());
  SplitMix64 rng(17);
  Configuration x = configuration_from_mesh(mesh);
  for (int i = 0; i < x.size(); ++i) x(i) += 0.1 * (rng.uniform() - 0.5);

  double e1 = total_energy(shell, x, 1);
  double e8 = total_energy(shell, x, 8);
  EXPECT_EQ(e1, e8);  // bit identical by construction
  Eigen::VectorXd g1 = energy_gradient(shell, x, 1);
  Eigen::VectorXd g8 = energy_gradient(shell, x, 8);
  EXPECT_EQ((g1 - g8).lpNorm<Eigen::Infinity>(), 0.0);
  Eigen::SparseMatrix<double> h1 = energy_hessian(shell, x, 1);
  Eigen::SparseMatrix<double> h8 = energy_hessian(shell, x, 8);
  EXPECT_EQ((Eigen::MatrixXd(h1) - Eigen::MatrixXd(h8)).lpNorm<Eigen::Infinity>(), 0.0);
}

}  // namespace
}  // namespace lobeforge
