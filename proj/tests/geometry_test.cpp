#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"
#include "lobeforge/geometry/atl.hpp"
#include "lobeforge/geometry/contour.hpp"
#include "lobeforge/geometry/sg.hpp"
#include "lobeforge/geometry/stl_io.hpp"
#include "lobeforge/geometry/surface_patch.hpp"
#include "lobeforge/geometry/thickness.hpp"
#include "lobeforge/geometry/triangulate.hpp"

namespace lobeforge {
namespace {

SurfacePatch unit_square_patch() {
  SurfacePatch patch;
  patch.evaluate = [](double u, double v) { return Eigen::Vector3d(u, v, 0.0); };
  BoundarySegment bottom, right, top, left;
  bottom.tag = kTagHinge;
  bottom.uv = {{0.0, 0.0}, {1.0, 0.0}};
  right.tag = kTagLateral;
  right.uv = {{1.0, 0.0}, {1.0, 1.0}};
  top.tag = kTagFreeEdge;
  top.uv = {{1.0, 1.0}, {0.0, 1.0}};
  left.tag = kTagLateral;
  left.uv = {{0.0, 1.0}, {0.0, 0.0}};
  patch.boundary = {bottom, right, top, left};
  patch.apex_uv = {0.5, 0.5};
  return patch;
}

double mesh_area(const TriMesh& mesh) {
  double area = 0.0;
  for (const auto& tri : mesh.triangles)
    area += triangle_area(mesh.positions[tri[0]], mesh.positions[tri[1]],
                          mesh.positions[tri[2]]);
  return area;
}

int euler_characteristic(const TriMesh& mesh) {
  MeshTopology topo = build_topology(mesh);
  return mesh.vertex_count() - static_cast<int>(topo.edges.size()) +
         static_cast<int>(mesh.triangles.size());
}

TEST(Contour, DefaultShapeIsValid) {
  LobeContour c = make_lobe_contour();
  validate_contour(c);
  EXPECT_EQ(c.points[c.hinge_begin].y(), -12.5);
  EXPECT_EQ(c.points[c.hinge_end].y(), -12.5);
  EXPECT_NEAR(c.points[c.apex_index].x(), 0.0, 1e-9);
  EXPECT_NEAR(c.points[c.apex_index].y(), 12.5, 1e-9);
  double width = 0.0, height = 0.0;
  for (const auto& p : c.points) {
    width = std::max(width, std::abs(p.x()));
    height = std::max(height, std::abs(p.y()));
  }
  EXPECT_NEAR(width, 20.0, 1e-9);
  EXPECT_NEAR(height, 12.5, 1e-9);
}

TEST(Contour, TabSplicesIntoHinge) {
  LobeContour c = make_lobe_contour();
  c.tab = TabSpec{};
  LobeContour shaped = apply_tab(c);
  validate_contour(shaped);
  int below = 0;
  for (int i = shaped.hinge_begin; i <= shaped.hinge_end; ++i)
    if (shaped.points[i].y() < -12.5 - 1e-9) ++below;
  EXPECT_EQ(below, 2);  // the two protruding tab corners
  double min_y = 0.0;
  for (const auto& p : shaped.points) min_y = std::min(min_y, p.y());
  EXPECT_NEAR(min_y, -17.5, 1e-9);
  EXPECT_NEAR(shaped.points[shaped.apex_index].y(), 12.5, 1e-9);

  std::vector<std::uint8_t> tags;
  auto polylines = contour_polylines(shaped, &tags);
  ASSERT_EQ(polylines.size(), 2u);
  EXPECT_EQ(tags[0], kTagHinge);
  int bump_in_hinge = 0;
  for (const auto& p : polylines[0])
    if (p.y() < -12.5 - 1e-9) ++bump_in_hinge;
  EXPECT_EQ(bump_in_hinge, 2);
}

TEST(Contour, TabWiderThanHingeThrows) {
  LobeContour c = make_lobe_contour();
  c.tab = TabSpec{45.0, 5.0};
  try {
    apply_tab(c);
    FAIL() << "expected RangeError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RangeError);
  }
}

TEST(Triangulate, UnitSquareBasics) {
  TriangulateOptions opt;
  opt.target_edge = 0.3;
  TriMesh mesh = triangulate(unit_square_patch(), opt);
  EXPECT_NEAR(mesh_area(mesh), 1.0, 1e-9);
  EXPECT_EQ(euler_characteristic(mesh), 1);  // a disk
  EXPECT_GE(mesh.apex, 0);
  EXPECT_LT((mesh.positions[mesh.apex] - Eigen::Vector3d(0.5, 0.5, 0.0)).norm(), 0.3);
  EXPECT_FALSE(vertices_with_tag(mesh, kTagHinge).empty());
  EXPECT_FALSE(vertices_with_tag(mesh, kTagFreeEdge).empty());
  EXPECT_FALSE(vertices_with_tag(mesh, kTagLateral).empty());
  for (const auto& tri : mesh.triangles) {
    double max_edge = std::max({(mesh.positions[tri[0]] - mesh.positions[tri[1]]).norm(),
                                (mesh.positions[tri[1]] - mesh.positions[tri[2]]).norm(),
                                (mesh.positions[tri[2]] - mesh.positions[tri[0]]).norm()});
    EXPECT_LE(max_edge, 1.5 * opt.target_edge);
  }
}

TEST(Triangulate, RefinementScalesTriangleCount) {
  TriangulateOptions coarse, fine;
  coarse.target_edge = 0.3;
  fine.target_edge = 0.15;
  TriMesh a = triangulate(unit_square_patch(), coarse);
  TriMesh b = triangulate(unit_square_patch(), fine);
  double ratio = static_cast<double>(b.triangles.size()) / a.triangles.size();
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}

TEST(Triangulate, BoundaryTagsCoverRing) {
  TriangulateOptions opt;
  opt.target_edge = 0.25;
  TriMesh mesh = triangulate(unit_square_patch(), opt);
  MeshTopology topo = build_topology(mesh);
  for (const auto& loop : boundary_loops(mesh, topo))
    for (int v : loop) EXPECT_NE(mesh.tags[v], kTagNone);
}

TEST(Projection, PointsLandOnEllipsoid) {
  EllipsoidSpec spec;
  Eigen::Vector2d sketch(7.0, -4.0);
  Eigen::Vector3d p = project_to_ellipsoid(sketch, spec);
  Eigen::Vector3d scaled = p.cwiseQuotient(spec.semi_axes);
  EXPECT_NEAR(scaled.squaredNorm(), 1.0, 1e-12);
  EXPECT_GT(p.z(), 0.0);  // upper sheet for the default upward direction
  EXPECT_EQ(p.x(), sketch.x());
  EXPECT_EQ(p.y(), sketch.y());
}

TEST(Projection, Idempotent) {
  EllipsoidSpec spec;
  Eigen::Vector3d p = project_to_ellipsoid({11.0, 6.5}, spec);
  Eigen::Vector3d q = project_to_ellipsoid({p.x(), p.y()}, spec);
  EXPECT_LT((p - q).norm(), 1e-9);
}

TEST(Projection, MissThrows) {
  EllipsoidSpec spec;
  try {
    project_to_ellipsoid({40.0, 0.0}, spec);
    FAIL() << "expected ProjectionMiss";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProjectionMiss);
  }
}

TEST(AtlSurface, MeshLiesOnEllipsoidWithExpectedExtent) {
  LobeContour contour = make_lobe_contour();
  contour.tab = TabSpec{};
  EllipsoidSpec ellipsoid;
  SurfacePatch patch = generate_atl_surface(contour, ellipsoid);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  validate_mesh(mesh);
  Eigen::Vector3d lo(1e300, 1e300, 1e300), hi = -lo;
  for (const auto& p : mesh.positions) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    EXPECT_NEAR(p.cwiseQuotient(ellipsoid.semi_axes).squaredNorm(), 1.0, 1e-9);
  }
  EXPECT_NEAR(hi.x() - lo.x(), 40.0, 1e-6);
  EXPECT_NEAR(hi.y() - lo.y(), 30.0, 1e-6);  // 25 mm lobe plus 5 mm tab
  EXPECT_GT(lo.z(), 0.0);
  EXPECT_LE(hi.z(), 15.0 + 1e-9);
  // The apex vertex sits near the top of the free edge arc.
  EXPECT_NEAR(mesh.positions[mesh.apex].y(), 12.5, 2.0);
}

TEST(SgSurface, FlatLimitHasNoHeight) {
  SGPatchSpec spec;
  spec.kappa_long = -1e-12;
  spec.kappa_trans = -1e-12;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 3.0;
  TriMesh mesh = triangulate(patch, opt);
  for (const auto& p : mesh.positions) EXPECT_LT(std::abs(p.z()), 1e-8);
}

TEST(SgSurface, MixedCurvatureSignsRejected) {
  SGPatchSpec spec;
  spec.kappa_long = 0.02;
  spec.kappa_trans = -0.02;
  try {
    validate_sg(spec);
    FAIL() << "expected InvalidCurvature";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidCurvature);
  }
}

TEST(SgSurface, DomeHeightMatchesQuadraticProfile) {
  SGPatchSpec spec;  // defaults: 40 x 25, kappa -0.02
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  for (const auto& p : mesh.positions)
    EXPECT_NEAR(p.z(), 0.5 * (-0.02) * (p.x() * p.x() + p.y() * p.y()), 1e-9);
  EXPECT_NEAR(mesh.positions[mesh.apex].norm(), 0.0, 1.5);
}

TEST(SgSurface, RestrainingStripIsFlatAndHingeTagged) {
  SGPatchSpec spec;
  spec.restraining_edge = true;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  int strip_count = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Eigen::Vector3d& p = mesh.positions[v];
    if (p.y() < -12.5 - 1e-9) {
      ++strip_count;
      double frozen = 0.5 * (-0.02) * (p.x() * p.x() + 12.5 * 12.5);
      EXPECT_NEAR(p.z(), frozen, 1e-9);
    }
  }
  EXPECT_GT(strip_count, 0);
  for (int v : vertices_with_tag(mesh, kTagHinge))
    EXPECT_NEAR(mesh.positions[v].y(), -15.5, 1e-9);
}

TEST(Thickness, ConstantAssignsEverywhere) {
  TriangulateOptions opt;
  opt.target_edge = 0.4;
  TriMesh mesh = triangulate(unit_square_patch(), opt);
  TriMesh out = assign_thickness(mesh, ThicknessField::constant(0.93));
  for (double t : out.thickness) EXPECT_EQ(t, 0.93);
}

TEST(Thickness, TaperMeetsEndpointsExactly) {
  SGPatchSpec spec;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  TriMesh out = assign_thickness(mesh, ThicknessField::taper(0.9, 1.3));
  EXPECT_DOUBLE_EQ(out.thickness[out.apex], 0.9);
  for (int v : vertices_with_tag(out, kTagHinge)) EXPECT_DOUBLE_EQ(out.thickness[v], 1.3);
  for (double t : out.thickness) {
    EXPECT_GE(t, 0.9);
    EXPECT_LE(t, 1.3);
  }
}

TEST(Thickness, RibDoublesOnlyNearHinge) {
  SGPatchSpec spec;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  mesh = assign_thickness(mesh, ThicknessField::constant(1.0));
  TriMesh ribbed = apply_rib(mesh, 3.0);
  MeshTopology topo = build_topology(mesh);
  std::vector<double> d = graph_distances(mesh, topo, vertices_with_tag(mesh, kTagHinge));
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (d[v] <= 3.0)
      EXPECT_EQ(ribbed.thickness[v], 2.0);
    else
      EXPECT_EQ(ribbed.thickness[v], 1.0);
  }
}

TEST(StlIo, FlatPrismVolumeIsExact) {
  TriangulateOptions opt;
  opt.target_edge = 0.4;
  TriMesh mesh = triangulate(unit_square_patch(), opt);
  mesh = assign_thickness(mesh, ThicknessField::constant(0.2));
  auto path = std::filesystem::temp_directory_path() / "lobeforge_prism.stl";
  export_stl(mesh, path);
  StlData data = parse_stl(path);
  EXPECT_TRUE(is_watertight_manifold(data));
  EXPECT_NEAR(signed_volume(data), 0.2, 2e-5);  // float32 rounding only
}

TEST(StlIo, RoundTripVolumeAndDeterminism) {
  SGPatchSpec spec;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  mesh = assign_thickness(mesh, ThicknessField::constant(0.93));

  auto path_a = std::filesystem::temp_directory_path() / "lobeforge_rt_a.stl";
  auto path_b = std::filesystem::temp_directory_path() / "lobeforge_rt_b.stl";
  export_stl(mesh, path_a);
  export_stl(mesh, path_b);

  std::ifstream fa(path_a, std::ios::binary), fb(path_b, std::ios::binary);
  std::vector<char> bytes_a((std::istreambuf_iterator<char>(fa)),
                            std::istreambuf_iterator<char>());
  std::vector<char> bytes_b((std::istreambuf_iterator<char>(fb)),
                            std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes_a, bytes_b);

  StlData data = parse_stl(path_a);
  EXPECT_TRUE(is_watertight_manifold(data));
  double expected = mesh_volume_estimate(mesh);
  EXPECT_NEAR(signed_volume(data), expected, 0.02 * expected);

  int v = static_cast<int>(data.positions.size());
  int f = static_cast<int>(data.triangles.size());
  std::set<std::pair<int, int>> edges;
  for (const auto& tri : data.triangles)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(tri[k], tri[(k + 1) % 3]));
  EXPECT_EQ(v - static_cast<int>(edges.size()) + f, 2);  // closed surface
}

TEST(StlIo, TruncatedFileRejected) {
  auto path = std::filesystem::temp_directory_path() / "lobeforge_bad.stl";
  std::ofstream out(path, std::ios::binary);
  std::vector<char> junk(90, 0);
  junk[80] = 5;  // claims 5 triangles but provides none
  out.write(junk.data(), static_cast<std::streamsize>(junk.size()));
  out.close();
  try {
    parse_stl(path);
    FAIL() << "expected FormatError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FormatError);
  }
}

TEST(StlIo, MissingFacetBreaksWatertightness) {
  SGPatchSpec spec;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 3.0;
  TriMesh mesh = triangulate(patch, opt);
  mesh = assign_thickness(mesh, ThicknessField::constant(0.93));
  auto path = std::filesystem::temp_directory_path() / "lobeforge_hole.stl";
  export_stl(mesh, path);
  StlData data = parse_stl(path);
  data.triangles.pop_back();
  EXPECT_FALSE(is_watertight_manifold(data));
}

TEST(StlIo, ExcessiveThicknessDetectedAsFoldover) {
  SGPatchSpec spec;
  spec.kappa_long = -0.05;
  spec.kappa_trans = -0.05;
  SurfacePatch patch = generate_sg_surface(spec);
  TriangulateOptions opt;
  opt.target_edge = 2.0;
  TriMesh mesh = triangulate(patch, opt);
  mesh = assign_thickness(mesh, ThicknessField::constant(60.0));
  try {
    build_offset_solid(mesh);
    FAIL() << "expected SelfIntersection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SelfIntersection);
  }
}

TEST(Delaunay, EmptyCircumcirclesOnScatter) {
  SplitMix64 rng(42);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 60; ++i)
    pts.emplace_back(rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0));
  auto tris = detail::delaunay_2d(pts);
  ASSERT_FALSE(tris.empty());
  for (const auto& t : tris) {
    auto dt = detail::make_delaunay_triangle(pts, t[0], t[1], t[2]);
    for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
      if (p == t[0] || p == t[1] || p == t[2]) continue;
      double d2 = (Eigen::Vector2d(dt.ccx, dt.ccy) - pts[p]).squaredNorm();
      EXPECT_GT(d2, dt.ccr2 * (1.0 - 1e-9));
    }
  }
}

}  // namespace
}  // namespace lobeforge
