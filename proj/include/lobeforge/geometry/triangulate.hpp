#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/rng.hpp"
#include "lobeforge/core/tri_mesh.hpp"
#include "lobeforge/geometry/surface_patch.hpp"

namespace lobeforge {
namespace detail {

struct DelaunayTriangle {
  int a, b, c;
  double ccx, ccy, ccr2;  // circumcircle
};

inline DelaunayTriangle make_delaunay_triangle(const std::vector<Eigen::Vector2d>& pts,
                                               int a, int b, int c) {
  const Eigen::Vector2d& pa = pts[a];
  const Eigen::Vector2d& pb = pts[b];
  const Eigen::Vector2d& pc = pts[c];
  double d = 2.0 * ((pa.x() - pc.x()) * (pb.y() - pc.y()) -
                    (pb.x() - pc.x()) * (pa.y() - pc.y()));
  double a2 = pa.squaredNorm() - pc.squaredNorm();
  double b2 = pb.squaredNorm() - pc.squaredNorm();
  DelaunayTriangle t;
  t.a = a;
  t.b = b;
  t.c = c;
  t.ccx = (a2 * (pb.y() - pc.y()) - b2 * (pa.y() - pc.y())) / d;
  t.ccy = ((pa.x() - pc.x()) * b2 - (pb.x() - pc.x()) * a2) / d;
  t.ccr2 = (Eigen::Vector2d(t.ccx, t.ccy) - pa).squaredNorm();
  return t;
}

// Incremental Bowyer-Watson triangulation of a fixed point set. Insertion
// order is the input order, so results are deterministic.
inline std::vector<std::array<int, 3>> delaunay_2d(std::vector<Eigen::Vector2d> pts) {
  int n = static_cast<int>(pts.size());
  require(n >= 3, ErrorCode::QualityFailure, "need at least 3 points");
  Eigen::Vector2d lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  double diam = std::max((hi - lo).maxCoeff(), 1e-9);
  Eigen::Vector2d mid = 0.5 * (lo + hi);
  pts.push_back(mid + Eigen::Vector2d(-20.0 * diam, -10.0 * diam));
  pts.push_back(mid + Eigen::Vector2d(20.0 * diam, -10.0 * diam));
  pts.push_back(mid + Eigen::Vector2d(0.0, 20.0 * diam));

  std::vector<DelaunayTriangle> tris;
  tris.push_back(make_delaunay_triangle(pts, n, n + 1, n + 2));
  std::vector<int> bad;
  for (int p = 0; p < n; ++p) {
    bad.clear();
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      double d2 = (Eigen::Vector2d(tris[t].ccx, tris[t].ccy) - pts[p]).squaredNorm();
      if (d2 < tris[t].ccr2 * (1.0 - 1e-12)) bad.push_back(t);
    }
    require(!bad.empty(), ErrorCode::QualityFailure, "point insertion found no cavity");
    // Cavity boundary: directed edges of bad triangles whose reverse is not
    // in the bad set.
    std::map<std::pair<int, int>, int> count;
    std::vector<std::pair<int, int>> directed;
    for (int t : bad) {
      int vs[3] = {tris[t].a, tris[t].b, tris[t].c};
      for (int k = 0; k < 3; ++k) {
        int u = vs[k], v = vs[(k + 1) % 3];
        directed.push_back({u, v});
        count[{std::min(u, v), std::max(u, v)}]++;
      }
    }
    std::vector<DelaunayTriangle> next;
    next.reserve(tris.size() + 2);
    std::set<int> bad_set(bad.begin(), bad.end());
    for (int t = 0; t < static_cast<int>(tris.size()); ++t)
      if (!bad_set.count(t)) next.push_back(tris[t]);
    for (const auto& [u, v] : directed) {
      if (count[{std::min(u, v), std::max(u, v)}] == 1)
        next.push_back(make_delaunay_triangle(pts, u, v, p));
    }
    tris.swap(next);
  }
  std::vector<std::array<int, 3>> out;
  for (const auto& t : tris)
    if (t.a < n && t.b < n && t.c < n) out.push_back({t.a, t.b, t.c});
  return out;
}

}  // namespace detail

struct TriangulateOptions {
  double target_edge = 2.0;      // mm, desired 3D edge length
  double min_angle_deg = 10.0;   // quality gate
  double boundary_clearance = 0.45;  // lattice drop radius, in lattice units
};

// Samples the patch with a hexagonal uv lattice plus a resampled boundary
// ring, triangulates in the uv plane, lifts to 3D and tags the result.
inline TriMesh triangulate(const SurfacePatch& patch, const TriangulateOptions& opt) {
  require(opt.target_edge > 0.0, ErrorCode::RangeError, "target edge must be positive");
  PatchOutline outline = patch_outline(patch);
  int ring_n = static_cast<int>(outline.uv.size());

  // Per-edge tags of the source outline (edge i connects point i to i+1).
  std::vector<std::uint8_t> edge_tags(ring_n);
  {
    int idx = 0;
    int n_seg = static_cast<int>(patch.boundary.size());
    for (int s = 0; s < n_seg; ++s)
      for (size_t i = 0; i + 1 < patch.boundary[s].uv.size(); ++i)
        edge_tags[idx++] = patch.boundary[s].tag;
  }

  // Resample the ring so consecutive 3D points are at most target_edge
  // apart. Outline edges are bisected in uv until every lifted chord fits;
  // chord-length splitting alone under-divides strongly curved edges.
  std::vector<Eigen::Vector2d> ring;
  std::vector<std::uint8_t> ring_edge_tag;
  double ring_target = 0.95 * opt.target_edge;
  auto emit_edge = [&](auto&& self, const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                       std::uint8_t tag, int depth) -> void {
    Eigen::Vector3d P = patch.evaluate(p.x(), p.y());
    Eigen::Vector3d Q = patch.evaluate(q.x(), q.y());
    if (depth >= 12 || (Q - P).norm() <= ring_target) {
      ring.push_back(p);
      ring_edge_tag.push_back(tag);
      return;
    }
    Eigen::Vector2d m = 0.5 * (p + q);
    self(self, p, m, tag, depth + 1);
    self(self, m, q, tag, depth + 1);
  };
  for (int i = 0; i < ring_n; ++i)
    emit_edge(emit_edge, outline.uv[i], outline.uv[(i + 1) % ring_n], edge_tags[i], 0);
  int n_ring = static_cast<int>(ring.size());
  std::vector<std::uint8_t> ring_tag(n_ring);
  for (int i = 0; i < n_ring; ++i)
    ring_tag[i] = ring_edge_tag[(i + n_ring - 1) % n_ring] | ring_edge_tag[i];

  // Interior lattice sized by the worst metric stretch of the evaluator.
  double stretch = max_metric_stretch(patch, outline.uv);
  double h = 0.9 * opt.target_edge / stretch;
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : outline.uv) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  std::vector<Eigen::Vector2d> pts = ring;
  SplitMix64 jitter(0x10be50f7ULL);
  double clear2 = opt.boundary_clearance * h;
  int rows = static_cast<int>(std::ceil((hi.y() - lo.y()) / (h * 0.8660254037844386))) + 1;
  for (int r = 0; r <= rows; ++r) {
    double y = lo.y() + r * h * 0.8660254037844386;
    double x_off = (r % 2 == 0) ? 0.0 : 0.5 * h;
    int cols = static_cast<int>(std::ceil((hi.x() - lo.x()) / h)) + 1;
    for (int cidx = 0; cidx <= cols; ++cidx) {
      Eigen::Vector2d p(lo.x() + x_off + cidx * h, y);
      p.x() += (jitter.uniform() - 0.5) * 2e-4 * h;
      p.y() += (jitter.uniform() - 0.5) * 2e-4 * h;
      if (!point_in_polygon(outline.uv, p, 0.0)) continue;
      bool clear = true;
      for (int i = 0; i < n_ring && clear; ++i) {
        const Eigen::Vector2d& a = ring[i];
        const Eigen::Vector2d& b = ring[(i + 1) % n_ring];
        Eigen::Vector2d d = b - a;
        double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
        if ((a + t * d - p).norm() < clear2) clear = false;
      }
      if (clear) pts.push_back(p);
    }
  }

  auto tris = detail::delaunay_2d(pts);

  TriMesh mesh;
  mesh.positions.reserve(pts.size());
  for (const auto& p : pts) mesh.positions.push_back(patch.evaluate(p.x(), p.y()));
  mesh.thickness.assign(pts.size(), 1.0);
  mesh.tags.assign(pts.size(), kTagNone);
  for (int i = 0; i < n_ring; ++i) mesh.tags[i] = ring_tag[i];

  for (const auto& t : tris) {
    Eigen::Vector2d centroid = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
    if (!point_in_polygon(outline.uv, centroid, 1e-12)) continue;
    double area2 = (pts[t[1]] - pts[t[0]]).x() * (pts[t[2]] - pts[t[0]]).y() -
                   (pts[t[1]] - pts[t[0]]).y() * (pts[t[2]] - pts[t[0]]).x();
    std::array<int, 3> tri = t;
    if (area2 < 0.0) std::swap(tri[1], tri[2]);
    mesh.triangles.push_back(tri);
  }
  require(!mesh.triangles.empty(), ErrorCode::QualityFailure, "triangulation empty");

  // Drop isolated vertices (lattice points that ended up outside every kept
  // triangle, e.g. in pockets filtered by the centroid test).
  {
    std::vector<int> remap(mesh.positions.size(), -1);
    TriMesh compact;
    for (const auto& tri : mesh.triangles) {
      for (int v : tri) {
        if (remap[v] == -1) {
          remap[v] = compact.vertex_count();
          compact.positions.push_back(mesh.positions[v]);
          compact.thickness.push_back(mesh.thickness[v]);
          compact.tags.push_back(mesh.tags[v]);
        }
      }
    }
    for (const auto& tri : mesh.triangles)
      compact.triangles.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
    // Boundary recovery check needs the ring remap before we overwrite mesh.
    for (int i = 0; i < n_ring; ++i)
      require(remap[i] != -1, ErrorCode::QualityFailure, "boundary vertex dropped");
    std::map<std::pair<int, int>, bool> mesh_edges;
    for (const auto& tri : compact.triangles)
      for (int k = 0; k < 3; ++k)
        mesh_edges[std::minmax(tri[k], tri[(k + 1) % 3])] = true;
    for (int i = 0; i < n_ring; ++i) {
      int a = remap[i], b = remap[(i + 1) % n_ring];
      require(mesh_edges.count(std::minmax(a, b)) > 0, ErrorCode::QualityFailure,
              "boundary edge not recovered by triangulation");
    }
    mesh = std::move(compact);
  }

  // Apex: nearest mesh vertex to the patch apex location.
  Eigen::Vector3d apex3 = patch.evaluate(patch.apex_uv.x(), patch.apex_uv.y());
  double best = 1e300;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    double d = (mesh.positions[v] - apex3).squaredNorm();
    if (d < best) {
      best = d;
      mesh.apex = v;
    }
  }

  double min_angle = 1e300, max_edge = 0.0;
  for (const auto& tri : mesh.triangles) {
    const auto& a = mesh.positions[tri[0]];
    const auto& b = mesh.positions[tri[1]];
    const auto& c = mesh.positions[tri[2]];
    min_angle = std::min(min_angle, triangle_min_angle(a, b, c));
    max_edge = std::max({max_edge, (a - b).norm(), (b - c).norm(), (c - a).norm()});
  }
  require(min_angle > opt.min_angle_deg * M_PI / 180.0, ErrorCode::QualityFailure,
          "triangle quality below minimum angle");
  require(max_edge <= 1.5 * opt.target_edge, ErrorCode::QualityFailure,
          "edge length exceeds 1.5x target");
  validate_mesh(mesh);
  return mesh;
}

}  // namespace lobeforge
