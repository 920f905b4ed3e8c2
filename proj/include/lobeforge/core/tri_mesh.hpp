#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <vector>

#include "lobeforge/core/error.hpp"

namespace lobeforge {

// Boundary role markers, stored per vertex as a bitmask because corner
// vertices belong to two boundary polylines at once.
enum BoundaryTag : std::uint8_t {
  kTagNone = 0,
  kTagHinge = 1,
  kTagFreeEdge = 2,
  kTagLateral = 4,
  kTagTab = 8,
};

// Triangulated midsurface. Positions in mm, per-vertex thickness in mm,
// triangles wound counter-clockwise around the outward (convex-side) normal.
struct TriMesh {
  std::vector<Eigen::Vector3d> positions;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> thickness;
  std::vector<std::uint8_t> tags;
  int apex = -1;

  int vertex_count() const { return static_cast<int>(positions.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
};

inline double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline double triangle_min_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                 const Eigen::Vector3d& c) {
  auto corner = [](const Eigen::Vector3d& p, const Eigen::Vector3d& q,
                   const Eigen::Vector3d& r) {
    Eigen::Vector3d u = q - p;
    Eigen::Vector3d v = r - p;
    double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    double cosang = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(cosang);
  };
  return std::min({corner(a, b, c), corner(b, c, a), corner(c, a, b)});
}

// Undirected edge record. f1 == -1 marks a boundary edge. opp0/opp1 are the
// vertices opposite the edge in f0/f1 (the bending stencil flaps).
struct EdgeInfo {
  int v0 = -1, v1 = -1;
  int f0 = -1, f1 = -1;
  int opp0 = -1, opp1 = -1;
};

struct MeshTopology {
  std::vector<EdgeInfo> edges;                  // sorted by (v0, v1)
  std::vector<std::array<int, 3>> face_edges;   // edge index opposite corner k
  std::vector<int> interior_edges;
  std::vector<int> boundary_edges;
};

inline MeshTopology build_topology(const TriMesh& mesh) {
  MeshTopology topo;
  std::map<std::pair<int, int>, int> edge_index;
  topo.face_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  for (int f = 0; f < mesh.triangle_count(); ++f) {
    const auto& tri = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3];
      int b = tri[(k + 2) % 3];
      auto key = std::minmax(a, b);
      auto it = edge_index.find(key);
      if (it == edge_index.end()) {
        EdgeInfo e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.f0 = f;
        e.opp0 = tri[k];
        topo.edges.push_back(e);
        it = edge_index.emplace(key, static_cast<int>(topo.edges.size()) - 1).first;
      } else {
        EdgeInfo& e = topo.edges[it->second];
        require(e.f1 == -1, ErrorCode::QualityFailure,
                "edge shared by more than two triangles");
        e.f1 = f;
        e.opp1 = tri[k];
      }
      topo.face_edges[f][k] = it->second;
    }
  }
  // Edges were appended in face-traversal order; rebuild a deterministic
  // ordering keyed by the vertex pair so downstream element numbering does
  // not depend on triangle order.
  std::vector<int> order(topo.edges.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const EdgeInfo& a = topo.edges[i];
    const EdgeInfo& b = topo.edges[j];
    return std::make_pair(a.v0, a.v1) < std::make_pair(b.v0, b.v1);
  });
  std::vector<int> rank(order.size());
  for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  std::vector<EdgeInfo> sorted(topo.edges.size());
  for (size_t i = 0; i < order.size(); ++i) sorted[i] = topo.edges[order[i]];
  topo.edges.swap(sorted);
  for (auto& fe : topo.face_edges)
    for (int k = 0; k < 3; ++k) fe[k] = rank[fe[k]];
  for (int e = 0; e < static_cast<int>(topo.edges.size()); ++e) {
    if (topo.edges[e].f1 == -1)
      topo.boundary_edges.push_back(e);
    else
      topo.interior_edges.push_back(e);
  }
  return topo;
}

// Checks winding consistency: every undirected interior edge must be
// traversed once in each direction by its two faces.
inline bool consistent_winding(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k];
      int b = tri[(k + 1) % 3];
      if (++directed[{a, b}] > 1) return false;
    }
  }
  return true;
}

// Structural validation shared by mesh producers and consumers. Throws on
// out-of-range indices, non-finite or non-positive data, degenerate
// triangles, and non-manifold connectivity.
inline void validate_mesh(const TriMesh& mesh) {
  require(!mesh.positions.empty(), ErrorCode::QualityFailure, "mesh has no vertices");
  require(!mesh.triangles.empty(), ErrorCode::QualityFailure, "mesh has no triangles");
  require(mesh.thickness.size() == mesh.positions.size(), ErrorCode::QualityFailure,
          "thickness count differs from vertex count");
  require(mesh.tags.size() == mesh.positions.size(), ErrorCode::QualityFailure,
          "tag count differs from vertex count");
  int n = mesh.vertex_count();
  for (const auto& p : mesh.positions)
    require(p.allFinite(), ErrorCode::QualityFailure, "non-finite vertex position");
  for (double t : mesh.thickness)
    require(std::isfinite(t) && t > 0.0, ErrorCode::QualityFailure,
            "non-positive vertex thickness");
  for (const auto& tri : mesh.triangles) {
    for (int v : tri)
      require(v >= 0 && v < n, ErrorCode::QualityFailure, "triangle index out of range");
    require(tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2],
            ErrorCode::QualityFailure, "repeated vertex in triangle");
    double area = triangle_area(mesh.positions[tri[0]], mesh.positions[tri[1]],
                                mesh.positions[tri[2]]);
    require(area > 1e-12, ErrorCode::QualityFailure, "degenerate triangle");
  }
  require(mesh.apex >= 0 && mesh.apex < n, ErrorCode::QualityFailure,
          "apex vertex not set");
  require(consistent_winding(mesh), ErrorCode::QualityFailure,
          "inconsistent triangle winding");
  build_topology(mesh);  // throws if an edge has more than two faces
}

// Ordered boundary loops (interior kept on the left, i.e. loops run
// counter-clockwise when the surface normal points at the viewer).
inline std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh,
                                                    const MeshTopology& topo) {
  std::map<int, int> next_on_boundary;  // directed boundary edge a -> b
  for (int e : topo.boundary_edges) {
    const EdgeInfo& edge = topo.edges[e];
    const auto& tri = mesh.triangles[edge.f0];
    for (int k = 0; k < 3; ++k) {
      int a = tri[k];
      int b = tri[(k + 1) % 3];
      if (std::min(a, b) == std::min(edge.v0, edge.v1) &&
          std::max(a, b) == std::max(edge.v0, edge.v1)) {
        next_on_boundary[a] = b;
      }
    }
  }
  std::vector<std::vector<int>> loops;
  std::map<int, bool> used;
  for (const auto& [start, unused_next] : next_on_boundary) {
    if (used.count(start)) continue;
    std::vector<int> loop;
    int v = start;
    while (!used.count(v)) {
      used[v] = true;
      loop.push_back(v);
      auto it = next_on_boundary.find(v);
      require(it != next_on_boundary.end(), ErrorCode::QualityFailure,
              "open boundary chain");
      v = it->second;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

// Dijkstra over the edge graph with Euclidean weights from a source set.
// Returns one distance per vertex (inf for unreachable).
inline std::vector<double> graph_distances(const TriMesh& mesh,
                                           const MeshTopology& topo,
                                           const std::vector<int>& sources) {
  int n = mesh.vertex_count();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const EdgeInfo& e : topo.edges) {
    double w = (mesh.positions[e.v0] - mesh.positions[e.v1]).norm();
    adj[e.v0].push_back({e.v1, w});
    adj[e.v1].push_back({e.v0, w});
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : sources) {
    require(s >= 0 && s < n, ErrorCode::RangeError, "distance source out of range");
    dist[s] = 0.0;
    heap.push({0.0, s});
  }
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (auto [u, w] : adj[v]) {
      if (dist[v] + w < dist[u]) {
        dist[u] = dist[v] + w;
        heap.push({dist[u], u});
      }
    }
  }
  return dist;
}

// Shortest vertex path between two vertices (inclusive), used to place
// offset indentation points along the surface.
inline std::vector<int> shortest_path(const TriMesh& mesh, const MeshTopology& topo,
                                      int from, int to) {
  int n = mesh.vertex_count();
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const EdgeInfo& e : topo.edges) {
    double w = (mesh.positions[e.v0] - mesh.positions[e.v1]).norm();
    adj[e.v0].push_back({e.v1, w});
    adj[e.v1].push_back({e.v0, w});
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[from] = 0.0;
  heap.push({0.0, from});
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (v == to) break;
    for (auto [u, w] : adj[v]) {
      if (dist[v] + w < dist[u]) {
        dist[u] = dist[v] + w;
        prev[u] = v;
        heap.push({dist[u], u});
      }
    }
  }
  require(std::isfinite(dist[to]), ErrorCode::RangeError, "vertices not connected");
  std::vector<int> path;
  for (int v = to; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline std::vector<int> vertices_with_tag(const TriMesh& mesh, std::uint8_t tag) {
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (mesh.tags[v] & tag) out.push_back(v);
  return out;
}

}  // namespace lobeforge
