#include "polyrecon/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace polyrecon {

BoundingBox SurfaceMesh::bounds() const {
  if (vertices.empty()) raise(Errc::EmptyMesh, "mesh has no vertices");
  BoundingBox box{vertices.front(), vertices.front()};
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

double SurfaceMesh::face_area(int face) const {
  const std::vector<int>& ring = faces[static_cast<std::size_t>(face)];
  if (ring.size() < 3) return 0.0;
  Vec3 cross_sum = Vec3::Zero();
  const Vec3& a = vertices[static_cast<std::size_t>(ring[0])];
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    cross_sum += (vertices[static_cast<std::size_t>(ring[i])] - a)
                     .cross(vertices[static_cast<std::size_t>(ring[i + 1])] - a);
  }
  return 0.5 * cross_sum.norm();
}

Vec3 SurfaceMesh::face_normal(int face) const {
  const std::vector<int>& ring = faces[static_cast<std::size_t>(face)];
  Vec3 cross_sum = Vec3::Zero();
  const Vec3& a = vertices[static_cast<std::size_t>(ring[0])];
  for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
    cross_sum += (vertices[static_cast<std::size_t>(ring[i])] - a)
                     .cross(vertices[static_cast<std::size_t>(ring[i + 1])] - a);
  }
  const double len = cross_sum.norm();
  return len > 0.0 ? Vec3(cross_sum / len) : Vec3::UnitZ();
}

double SurfaceMesh::total_area() const {
  double area = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) area += face_area(static_cast<int>(f));
  return area;
}

double SurfaceMesh::volume() const {
  double six_volume = 0.0;
  for (const auto& tri : triangulated()) {
    const Vec3& a = vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = vertices[static_cast<std::size_t>(tri[2])];
    six_volume += a.dot(b.cross(c));
  }
  return six_volume / 6.0;
}

std::vector<std::array<int, 3>> SurfaceMesh::triangulated() const {
  std::vector<std::array<int, 3>> triangles;
  for (const std::vector<int>& ring : faces) {
    for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
      const Vec3& a = vertices[static_cast<std::size_t>(ring[0])];
      const Vec3& b = vertices[static_cast<std::size_t>(ring[i])];
      const Vec3& c = vertices[static_cast<std::size_t>(ring[i + 1])];
      if ((b - a).cross(c - a).norm() <= 2.0 * kEpsArea) continue;
      triangles.push_back({ring[0], ring[i], ring[i + 1]});
    }
  }
  return triangles;
}

namespace {

// Welds vertices within kEps and returns the remap table.
std::vector<int> weld(const std::vector<Vec3>& vertices) {
  const double cell = 4.0 * kEps;
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<int>> grid;
  std::vector<int> remap(vertices.size(), -1);
  std::vector<Vec3> unique_points;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& p = vertices[i];
    int found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx)
      for (int dy = -1; dy <= 1 && found < 0; ++dy)
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          const auto key = std::tuple<std::int64_t, std::int64_t, std::int64_t>(
              static_cast<std::int64_t>(std::floor(p.x() / cell)) + dx,
              static_cast<std::int64_t>(std::floor(p.y() / cell)) + dy,
              static_cast<std::int64_t>(std::floor(p.z() / cell)) + dz);
          auto it = grid.find(key);
          if (it == grid.end()) continue;
          for (int candidate : it->second) {
            if ((unique_points[static_cast<std::size_t>(candidate)] - p).squaredNorm() <=
                kEps * kEps) {
              found = candidate;
              break;
            }
          }
        }
    if (found < 0) {
      found = static_cast<int>(unique_points.size());
      unique_points.push_back(p);
      grid[std::tuple<std::int64_t, std::int64_t, std::int64_t>(
              static_cast<std::int64_t>(std::floor(p.x() / cell)),
              static_cast<std::int64_t>(std::floor(p.y() / cell)),
              static_cast<std::int64_t>(std::floor(p.z() / cell)))]
          .push_back(found);
    }
    remap[i] = found;
  }
  return remap;
}

}  // namespace

WatertightReport watertight_check(const SurfaceMesh& mesh) {
  WatertightReport report;
  if (mesh.empty()) return report;
  const std::vector<int> remap = weld(mesh.vertices);

  // Directed edge uses per undirected edge.
  std::map<std::pair<int, int>, std::pair<int, int>> edges;  // (lo,hi) -> (forward, backward)
  for (const std::vector<int>& ring : mesh.faces) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      int a = remap[static_cast<std::size_t>(ring[i])];
      int b = remap[static_cast<std::size_t>(ring[(i + 1) % n])];
      if (a == b) continue;  // collapsed edge after welding
      const bool forward = a < b;
      auto key = forward ? std::make_pair(a, b) : std::make_pair(b, a);
      auto& use = edges[key];
      (forward ? use.first : use.second) += 1;
    }
  }
  for (const auto& [edge, use] : edges) {
    if (use.first == 1 && use.second == 1) continue;
    if (use.first + use.second == 1) {
      report.boundary_edges.push_back(edge);
    } else {
      report.nonmanifold_edges.push_back(edge);
    }
  }

  // Shell count via face connectivity over shared edges.
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const std::vector<int>& ring = mesh.faces[f];
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = remap[static_cast<std::size_t>(ring[i])];
      int b = remap[static_cast<std::size_t>(ring[(i + 1) % ring.size()])];
      if (a == b) continue;
      edge_faces[std::minmax(a, b)].push_back(static_cast<int>(f));
    }
  }
  std::vector<int> component(mesh.faces.size(), -1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (component[f] >= 0) continue;
    component[f] = report.shell_count;
    std::vector<std::size_t> stack{f};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::vector<int>& ring = mesh.faces[cur];
      for (std::size_t i = 0; i < ring.size(); ++i) {
        int a = remap[static_cast<std::size_t>(ring[i])];
        int b = remap[static_cast<std::size_t>(ring[(i + 1) % ring.size()])];
        if (a == b) continue;
        for (int other : edge_faces[std::minmax(a, b)]) {
          if (component[static_cast<std::size_t>(other)] < 0) {
            component[static_cast<std::size_t>(other)] = report.shell_count;
            stack.push_back(static_cast<std::size_t>(other));
          }
        }
      }
    }
    ++report.shell_count;
  }

  report.watertight = report.boundary_edges.empty() && report.nonmanifold_edges.empty();
  return report;
}

namespace {

// Moller-Trumbore; returns t or a negative value on miss.
double ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                    const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return -1.0;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  return e2.dot(qvec) * inv_det;
}

}  // namespace

int ray_crossings(const SurfaceMesh& mesh, const std::vector<std::array<int, 3>>& triangles,
                  const Vec3& origin, const Vec3& dir) {
  int crossings = 0;
  for (const auto& tri : triangles) {
    const double t = ray_triangle(origin, dir, mesh.vertices[static_cast<std::size_t>(tri[0])],
                                  mesh.vertices[static_cast<std::size_t>(tri[1])],
                                  mesh.vertices[static_cast<std::size_t>(tri[2])]);
    if (t > kEps) ++crossings;
  }
  return crossings;
}

RayHit first_hit(const SurfaceMesh& mesh, const std::vector<std::array<int, 3>>& triangles,
                 const Vec3& origin, const Vec3& dir) {
  RayHit hit;
  hit.t = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto& tri = triangles[i];
    const double t = ray_triangle(origin, dir, mesh.vertices[static_cast<std::size_t>(tri[0])],
                                  mesh.vertices[static_cast<std::size_t>(tri[1])],
                                  mesh.vertices[static_cast<std::size_t>(tri[2])]);
    if (t > kEps && t < hit.t) {
      hit.t = t;
      hit.triangle = static_cast<int>(i);
    }
  }
  if (hit.triangle < 0) hit.t = -1.0;
  return hit;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return (p - (a + v * ab)).norm();
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return (p - (a + w * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + w * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return (p - (a + v * ab + w * ac)).norm();
}

double point_mesh_distance(const Vec3& p, const SurfaceMesh& mesh,
                           const std::vector<std::array<int, 3>>& triangles) {
  if (triangles.empty()) raise(Errc::EmptyMesh, "mesh has no triangles");
  double best = std::numeric_limits<double>::max();
  for (const auto& tri : triangles) {
    best = std::min(best, point_triangle_distance(
                              p, mesh.vertices[static_cast<std::size_t>(tri[0])],
                              mesh.vertices[static_cast<std::size_t>(tri[1])],
                              mesh.vertices[static_cast<std::size_t>(tri[2])]));
  }
  return best;
}

void write_obj(const SurfaceMesh& mesh, const std::string& path, bool triangulate) {
  std::ofstream out(path);
  if (!out) raise(Errc::BadInput, "cannot open '" + path + "' for writing");
  out.precision(17);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  if (triangulate) {
    for (const auto& tri : mesh.triangulated()) {
      out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
    }
  } else {
    for (const std::vector<int>& ring : mesh.faces) {
      out << 'f';
      for (int v : ring) out << ' ' << v + 1;
      out << '\n';
    }
  }
}

SurfaceMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::BadInput, "cannot open '" + path + "'");
  SurfaceMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x() >> v.y() >> v.z();
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> ring;
      std::string token;
      while (ss >> token) {
        // Indices may carry /vt/vn suffixes.
        ring.push_back(std::stoi(token.substr(0, token.find('/'))) - 1);
      }
      if (ring.size() >= 3) mesh.faces.push_back(std::move(ring));
    }
  }
  return mesh;
}

}  // namespace polyrecon
