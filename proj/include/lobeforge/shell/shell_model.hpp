#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "lobeforge/core/dual.hpp"
#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"
#include "lobeforge/material.hpp"

namespace lobeforge {

// Vertex positions flattened to xyzxyz... in mm.
using Configuration = Eigen::VectorXd;

inline Configuration configuration_from_mesh(const TriMesh& mesh) {
  Configuration x(3 * mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) x.segment<3>(3 * v) = mesh.positions[v];
  return x;
}

inline Eigen::Vector3d config_position(const Configuration& x, int v) {
  return x.segment<3>(3 * v);
}

// Constant-strain triangle with a St. Venant-Kirchhoff plane-stress law.
// The rest frame is built purely from rest edge lengths, so the element is
// frame-invariant by construction. km = E t / (1 - nu^2) in N/mm.
struct MembraneElement {
  std::array<int, 3> v;
  Eigen::Matrix2d bm_inv;  // inverse of the 2D rest-shape matrix
  double area = 0.0;       // rest area, mm^2
  double km = 0.0;
};

// Hinge pair across an interior edge. Faces A and B are ordered so face A
// traverses the edge v0 -> v1; psi is the signed deviation of the dihedral
// from flat (pi). stiffness in N mm, so W = stiffness * (psi - rest_psi)^2
// is in mJ.
struct BendingElement {
  std::array<int, 4> v;  // v0, v1, flap in A, flap in B
  double rest_psi = 0.0;
  double stiffness = 0.0;
  double rest_lever = 0.0;      // mm, centroid offset arm used for actuation
  double rest_thickness = 0.0;  // mm, mean of the edge endpoint thicknesses
};

// Actuation of the two epidermis layers: the layer opposite the mesh normal
// expands by alpha_out while the layer on the normal side contracts by
// inner_ratio * alpha_out. Positive actuation drives the shell toward
// inversion of its as-built curvature.
struct ActuationState {
  double alpha_out = 0.0;
  double inner_ratio = 0.2;
  std::optional<double> lever_thickness;  // mm; defaults to local thickness
};

// Discrete thin shell: rest mesh plus precomputed per-element rest data.
struct ShellModel {
  TriMesh mesh;
  Material material;
  std::vector<MembraneElement> membrane;
  std::vector<BendingElement> bending;

  int dof_count() const { return 3 * mesh.vertex_count(); }
};

namespace detail {

template <class T>
using V3 = std::array<T, 3>;

template <class T>
V3<T> sub(const V3<T>& a, const V3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

template <class T>
T dot(const V3<T>& a, const V3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
V3<T> cross(const V3<T>& a, const V3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

template <class T>
V3<T> scaled(const V3<T>& a, T s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}

template <class T>
void add_scaled(V3<T>& a, const V3<T>& b, T s) {
  a[0] = a[0] + b[0] * s;
  a[1] = a[1] + b[1] * s;
  a[2] = a[2] + b[2] * s;
}

// Membrane energy and its gradient for one triangle; works for double and
// Dual scalars alike.
template <class T>
T membrane_energy_gradient(const MembraneElement& el, double poisson,
                           const V3<T> x[3], V3<T> grad[3]) {
  V3<T> d1 = sub(x[1], x[0]);
  V3<T> d2 = sub(x[2], x[0]);
  const Eigen::Matrix2d& B = el.bm_inv;
  V3<T> f1{d1[0] * B(0, 0) + d2[0] * B(1, 0), d1[1] * B(0, 0) + d2[1] * B(1, 0),
           d1[2] * B(0, 0) + d2[2] * B(1, 0)};
  V3<T> f2{d1[0] * B(0, 1) + d2[0] * B(1, 1), d1[1] * B(0, 1) + d2[1] * B(1, 1),
           d1[2] * B(0, 1) + d2[2] * B(1, 1)};
  T e11 = (dot(f1, f1) - 1.0) * 0.5;
  T e22 = (dot(f2, f2) - 1.0) * 0.5;
  T e12 = dot(f1, f2) * 0.5;
  double lam_t = el.km * poisson;             // plane-stress lambda times t
  double mu_t = el.km * (1.0 - poisson) / 2;  // shear modulus times t
  T tr = e11 + e22;
  T tr2 = e11 * e11 + 2.0 * (e12 * e12) + e22 * e22;
  T energy = el.area * (0.5 * lam_t * (tr * tr) + mu_t * tr2);

  // Second Piola-Kirchhoff, then P = F S and g = area * P * B^T.
  T s11 = lam_t * tr + 2.0 * mu_t * e11;
  T s22 = lam_t * tr + 2.0 * mu_t * e22;
  T s12 = 2.0 * mu_t * e12;
  V3<T> p1{f1[0] * s11 + f2[0] * s12, f1[1] * s11 + f2[1] * s12, f1[2] * s11 + f2[2] * s12};
  V3<T> p2{f1[0] * s12 + f2[0] * s22, f1[1] * s12 + f2[1] * s22, f1[2] * s12 + f2[2] * s22};
  V3<T> g1{T(0.0), T(0.0), T(0.0)}, g2{T(0.0), T(0.0), T(0.0)};
  add_scaled(g1, p1, T(el.area * B(0, 0)));
  add_scaled(g1, p2, T(el.area * B(0, 1)));
  add_scaled(g2, p1, T(el.area * B(1, 0)));
  add_scaled(g2, p2, T(el.area * B(1, 1)));
  grad[1] = g1;
  grad[2] = g2;
  grad[0] = {T(0.0) - g1[0] - g2[0], T(0.0) - g1[1] - g2[1], T(0.0) - g1[2] - g2[2]};
  return energy;
}

// Signed dihedral deviation from flat across edge x0-x1 with flaps x2 (face
// A, traversing v0->v1) and x3 (face B). Positive when the normal side is
// convex.
template <class T>
T dihedral_psi(const V3<T> x[4]) {
  using std::atan2;
  using std::sqrt;
  V3<T> e = sub(x[1], x[0]);
  V3<T> na = cross(e, sub(x[2], x[0]));
  V3<T> nb = cross(sub(x[0], x[1]), sub(x[3], x[1]));
  T lna = sqrt(dot(na, na));
  T lnb = sqrt(dot(nb, nb));
  T le = sqrt(dot(e, e));
  T sin_term = dot(cross(na, nb), e) / (lna * lnb * le);
  T cos_term = dot(na, nb) / (lna * lnb);
  return atan2(sin_term, cos_term);
}

template <class T>
T bending_energy_gradient(const BendingElement& el, const V3<T> x[4], V3<T> grad[4]) {
  using std::sqrt;
  V3<T> e = sub(x[1], x[0]);
  V3<T> na = cross(e, sub(x[2], x[0]));
  V3<T> nb = cross(sub(x[0], x[1]), sub(x[3], x[1]));
  T psi = dihedral_psi(x);
  T dev = psi - el.rest_psi;
  T energy = el.stiffness * dev * dev;

  T l2 = dot(e, e);
  T l = sqrt(l2);
  T p2 = dot(sub(x[2], x[0]), e) / l2;
  T p3 = dot(sub(x[3], x[0]), e) / l2;
  V3<T> ga = scaled(na, l / dot(na, na));
  V3<T> gb = scaled(nb, l / dot(nb, nb));
  T coeff = 2.0 * el.stiffness * dev;
  for (int k = 0; k < 4; ++k) grad[k] = {T(0.0), T(0.0), T(0.0)};
  add_scaled(grad[2], ga, T(0.0) - coeff);
  add_scaled(grad[3], gb, T(0.0) - coeff);
  add_scaled(grad[0], ga, (1.0 - p2) * coeff);
  add_scaled(grad[0], gb, (1.0 - p3) * coeff);
  add_scaled(grad[1], ga, p2 * coeff);
  add_scaled(grad[1], gb, p3 * coeff);
  return energy;
}

}  // namespace detail

// Assembles the discrete shell from a mesh with thickness and a material.
// Membrane stiffness scales as E t / (1 - nu^2), bending stiffness as
// E t^3 / 12(1 - nu^2) times the hinge geometry factor |e|^2 / 2(A_a + A_b),
// which reproduces the continuum plate rigidity on regular grids.
inline ShellModel build_shell(const TriMesh& mesh, const Material& material) {
  validate_mesh(mesh);
  ShellModel shell;
  shell.mesh = mesh;
  shell.material = material;
  double numem = 1.0 - material.poisson * material.poisson;
  require(numem > 0.0, ErrorCode::NonPhysical, "Poisson ratio too close to 1");

  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector3d& a = mesh.positions[tri[0]];
    const Eigen::Vector3d& b = mesh.positions[tri[1]];
    const Eigen::Vector3d& c = mesh.positions[tri[2]];
    double l01 = (b - a).norm();
    double l02 = (c - a).norm();
    double l12 = (c - b).norm();
    double x2 = (l01 * l01 + l02 * l02 - l12 * l12) / (2.0 * l01);
    double y2sq = l02 * l02 - x2 * x2;
    require(l01 > 1e-9 && y2sq > 1e-12, ErrorCode::DegenerateElement,
            "triangle rest shape is degenerate");
    double y2 = std::sqrt(y2sq);
    Eigen::Matrix2d dm;
    dm << l01, x2, 0.0, y2;
    MembraneElement el;
    el.v = tri;
    el.bm_inv = dm.inverse();
    el.area = 0.5 * l01 * y2;
    double t_mean =
        (mesh.thickness[tri[0]] + mesh.thickness[tri[1]] + mesh.thickness[tri[2]]) / 3.0;
    el.km = material.youngs_modulus * t_mean / numem;
    shell.membrane.push_back(el);
  }

  MeshTopology topo = build_topology(mesh);
  for (int ei : topo.interior_edges) {
    const EdgeInfo& edge = topo.edges[ei];
    // Face A must traverse the edge as v0 -> v1.
    int fa = -1, fb = -1, flap_a = -1, flap_b = -1;
    for (int side = 0; side < 2; ++side) {
      int f = side == 0 ? edge.f0 : edge.f1;
      int opp = side == 0 ? edge.opp0 : edge.opp1;
      const auto& tri = mesh.triangles[f];
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == edge.v0 && tri[(k + 1) % 3] == edge.v1) {
          fa = f;
          flap_a = opp;
        }
        if (tri[k] == edge.v1 && tri[(k + 1) % 3] == edge.v0) {
          fb = f;
          flap_b = opp;
        }
      }
    }
    require(fa >= 0 && fb >= 0, ErrorCode::QualityFailure,
            "interior edge lacks oriented faces");
    BendingElement el;
    el.v = {edge.v0, edge.v1, flap_a, flap_b};
    detail::V3<double> x[4];
    for (int k = 0; k < 4; ++k)
      for (int d = 0; d < 3; ++d) x[k][d] = mesh.positions[el.v[k]](d);
    el.rest_psi = detail::dihedral_psi(x);
    double l = (mesh.positions[edge.v1] - mesh.positions[edge.v0]).norm();
    double area_a = triangle_area(mesh.positions[mesh.triangles[fa][0]],
                                  mesh.positions[mesh.triangles[fa][1]],
                                  mesh.positions[mesh.triangles[fa][2]]);
    double area_b = triangle_area(mesh.positions[mesh.triangles[fb][0]],
                                  mesh.positions[mesh.triangles[fb][1]],
                                  mesh.positions[mesh.triangles[fb][2]]);
    double t_edge = 0.5 * (mesh.thickness[edge.v0] + mesh.thickness[edge.v1]);
    double rigidity = material.youngs_modulus * t_edge * t_edge * t_edge / (12.0 * numem);
    el.stiffness = rigidity * l * l / (2.0 * (area_a + area_b));
    el.rest_lever = (2.0 * area_a / l + 2.0 * area_b / l) / 3.0;
    el.rest_thickness = t_edge;
    shell.bending.push_back(el);
  }
  return shell;
}

// Returns a copy of the shell with grown layers folded into the rest state:
// the rest metric is scaled by the mid-layer stretch and every rest dihedral
// is offset by the spontaneous curvature times the hinge lever arm.
inline ShellModel apply_layer_actuation(const ShellModel& shell,
                                        const ActuationState& actuation) {
  require(actuation.inner_ratio >= 0.0, ErrorCode::RangeError,
          "inner contraction ratio must be non-negative");
  if (actuation.lever_thickness)
    require(*actuation.lever_thickness > 0.0, ErrorCode::RangeError,
            "lever thickness must be positive");
  if (actuation.alpha_out == 0.0) return shell;

  ShellModel out = shell;
  double mid_stretch =
      1.0 + (actuation.alpha_out - actuation.inner_ratio * actuation.alpha_out) / 2.0;
  require(mid_stretch > 0.0, ErrorCode::NonPhysical, "actuation collapses the midsurface");
  for (auto& el : out.membrane) {
    // Rest lengths scale by mid_stretch: Dm' = s Dm, so Bm' = Bm / s.
    el.bm_inv /= mid_stretch;
    el.area *= mid_stretch * mid_stretch;
  }
  for (auto& el : out.bending) {
    double t_lev = actuation.lever_thickness.value_or(el.rest_thickness);
    double kappa_bar =
        (actuation.alpha_out + actuation.inner_ratio * actuation.alpha_out) / t_lev;
    // Positive actuation expands the layer opposite the normal, bending the
    // shell toward normal-side concavity: the rest deviation decreases.
    el.rest_psi -= kappa_bar * el.rest_lever;
  }
  return out;
}

// Biases rest dihedrals toward the inverted branch, modeling stored growth
// prestress of the open state. scale = 0 leaves the shell untouched; at 1
// the rest curvature is fully flattened.
inline ShellModel apply_prestress(const ShellModel& shell, double scale) {
  require(scale >= 0.0 && scale <= 2.0, ErrorCode::RangeError,
          "prestress scale outside [0, 2]");
  ShellModel out = shell;
  for (auto& el : out.bending) el.rest_psi -= scale * el.rest_psi;
  return out;
}

}  // namespace lobeforge
