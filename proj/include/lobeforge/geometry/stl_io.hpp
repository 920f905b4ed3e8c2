#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "lobeforge/core/error.hpp"
#include "lobeforge/core/tri_mesh.hpp"

namespace lobeforge {

// Raw triangle soup read back from an STL file, welded by exact float bits.
struct StlData {
  std::vector<Eigen::Vector3d> positions;
  std::vector<std::array<int, 3>> triangles;
};

// Angle-weighted vertex normals of the midsurface.
inline std::vector<Eigen::Vector3d> vertex_normals(const TriMesh& mesh) {
  std::vector<Eigen::Vector3d> normals(mesh.positions.size(), Eigen::Vector3d::Zero());
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d& p = mesh.positions[tri[k]];
      Eigen::Vector3d u = mesh.positions[tri[(k + 1) % 3]] - p;
      Eigen::Vector3d v = mesh.positions[tri[(k + 2) % 3]] - p;
      double angle = std::acos(std::clamp(u.normalized().dot(v.normalized()), -1.0, 1.0));
      normals[tri[k]] += angle * u.cross(v).normalized();
    }
  }
  for (auto& n : normals) {
    require(n.norm() > 1e-12, ErrorCode::QualityFailure, "undefined vertex normal");
    n.normalize();
  }
  return normals;
}

// Closed two-sided solid built by offsetting the midsurface by half the
// local thickness along vertex normals and stitching the rim.
struct OffsetSolid {
  std::vector<Eigen::Vector3d> positions;        // top block then bottom block
  std::vector<std::array<int, 3>> triangles;
};

inline OffsetSolid build_offset_solid(const TriMesh& mesh) {
  validate_mesh(mesh);
  std::vector<Eigen::Vector3d> normals = vertex_normals(mesh);
  int n = mesh.vertex_count();
  OffsetSolid solid;
  solid.positions.resize(2 * n);
  for (int v = 0; v < n; ++v) {
    Eigen::Vector3d off = 0.5 * mesh.thickness[v] * normals[v];
    solid.positions[v] = mesh.positions[v] + off;
    solid.positions[n + v] = mesh.positions[v] - off;
  }
  // A face whose offset copy flips against the midsurface normal means the
  // offset surfaces cross each other (thickness too large for the local
  // curvature).
  for (const auto& tri : mesh.triangles) {
    Eigen::Vector3d mid_n = (mesh.positions[tri[1]] - mesh.positions[tri[0]])
                                .cross(mesh.positions[tri[2]] - mesh.positions[tri[0]]);
    for (int side = 0; side < 2; ++side) {
      int base = side * n;
      Eigen::Vector3d off_n = (solid.positions[base + tri[1]] - solid.positions[base + tri[0]])
                                  .cross(solid.positions[base + tri[2]] -
                                         solid.positions[base + tri[0]]);
      require(mid_n.dot(off_n) > 0.0, ErrorCode::SelfIntersection,
              "offset surface folds over itself");
    }
  }
  for (const auto& tri : mesh.triangles) {
    solid.triangles.push_back(tri);
    solid.triangles.push_back({n + tri[0], n + tri[2], n + tri[1]});
  }
  MeshTopology topo = build_topology(mesh);
  for (const auto& loop : boundary_loops(mesh, topo)) {
    int m = static_cast<int>(loop.size());
    for (int i = 0; i < m; ++i) {
      int a = loop[i], b = loop[(i + 1) % m];
      solid.triangles.push_back({a, n + a, n + b});
      solid.triangles.push_back({a, n + b, b});
    }
  }
  return solid;
}

// Midsurface-based estimate of the printed volume: area times mean local
// thickness per face. Curvature corrections enter at O((t/R)^2) and are
// negligible at sane wall thicknesses.
inline double mesh_volume_estimate(const TriMesh& mesh) {
  double vol = 0.0;
  for (const auto& tri : mesh.triangles) {
    double area = triangle_area(mesh.positions[tri[0]], mesh.positions[tri[1]],
                                mesh.positions[tri[2]]);
    double t = (mesh.thickness[tri[0]] + mesh.thickness[tri[1]] + mesh.thickness[tri[2]]) / 3.0;
    vol += area * t;
  }
  return vol;
}

namespace detail {

inline void put_f32(std::vector<std::uint8_t>& buf, float x) {
  std::uint8_t raw[4];
  std::memcpy(raw, &x, 4);
  buf.insert(buf.end(), raw, raw + 4);
}

inline void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t x) {
  std::uint8_t raw[4];
  std::memcpy(raw, &x, 4);
  buf.insert(buf.end(), raw, raw + 4);
}

}  // namespace detail

// Binary little-endian STL. The header is constant so identical inputs
// always produce byte-identical files.
inline void export_stl(const TriMesh& mesh, const std::filesystem::path& path) {
  OffsetSolid solid = build_offset_solid(mesh);
  std::vector<std::uint8_t> buf;
  buf.reserve(84 + solid.triangles.size() * 50);
  const char header[] = "offset-solid lobe export";
  for (int i = 0; i < 80; ++i)
    buf.push_back(i < static_cast<int>(sizeof(header)) - 1
                      ? static_cast<std::uint8_t>(header[i])
                      : 0);
  detail::put_u32(buf, static_cast<std::uint32_t>(solid.triangles.size()));
  for (const auto& tri : solid.triangles) {
    const Eigen::Vector3d& a = solid.positions[tri[0]];
    const Eigen::Vector3d& b = solid.positions[tri[1]];
    const Eigen::Vector3d& c = solid.positions[tri[2]];
    Eigen::Vector3d nrm = (b - a).cross(c - a);
    double len = nrm.norm();
    if (len > 0.0) nrm /= len;
    for (int k = 0; k < 3; ++k) detail::put_f32(buf, static_cast<float>(nrm(k)));
    for (const Eigen::Vector3d* p : {&a, &b, &c})
      for (int k = 0; k < 3; ++k) detail::put_f32(buf, static_cast<float>((*p)(k)));
    buf.push_back(0);
    buf.push_back(0);
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::IoFailure, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(out.good(), ErrorCode::IoFailure, "write failed for " + path.string());
}

inline StlData parse_stl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  require(buf.size() >= 84, ErrorCode::FormatError, "file too short for binary STL");
  std::uint32_t count;
  std::memcpy(&count, buf.data() + 80, 4);
  require(buf.size() == 84 + static_cast<size_t>(count) * 50, ErrorCode::FormatError,
          "binary STL size mismatch");
  StlData data;
  std::map<std::array<float, 3>, int> weld;
  size_t off = 84;
  for (std::uint32_t t = 0; t < count; ++t) {
    off += 12;  // stored facet normal is redundant
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      std::array<float, 3> p;
      std::memcpy(p.data(), buf.data() + off, 12);
      off += 12;
      auto it = weld.find(p);
      if (it == weld.end()) {
        it = weld.emplace(p, static_cast<int>(data.positions.size())).first;
        data.positions.emplace_back(p[0], p[1], p[2]);
      }
      tri[k] = it->second;
    }
    off += 2;
    data.triangles.push_back(tri);
  }
  return data;
}

// Every edge of a closed 2-manifold is used exactly twice, once in each
// direction.
inline bool is_watertight_manifold(const StlData& data) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : data.triangles) {
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) return false;
    for (int k = 0; k < 3; ++k) {
      if (++directed[{tri[k], tri[(k + 1) % 3]}] > 1) return false;
    }
  }
  for (const auto& [edge, n] : directed) {
    if (!directed.count({edge.second, edge.first})) return false;
    (void)n;
  }
  return true;
}

inline double signed_volume(const StlData& data) {
  double six_vol = 0.0;
  for (const auto& tri : data.triangles)
    six_vol += data.positions[tri[0]].dot(
        data.positions[tri[1]].cross(data.positions[tri[2]]));
  return six_vol / 6.0;
}

}  // namespace lobeforge
