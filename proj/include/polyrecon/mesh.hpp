#pragma once

#include "polyrecon/geometry.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace polyrecon {

// Polygonal surface mesh with shared vertices. Faces are planar n-gons
// (counter-clockwise about the outward normal); triangles are the n = 3 case.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;

  bool empty() const { return faces.empty(); }
  BoundingBox bounds() const;
  double face_area(int face) const;
  Vec3 face_normal(int face) const;
  double total_area() const;
  // Signed volume via the divergence theorem; positive for outward faces.
  double volume() const;
  // Fan triangulation of every face, degenerate triangles dropped.
  std::vector<std::array<int, 3>> triangulated() const;
};

struct WatertightReport {
  bool watertight = false;
  int shell_count = 0;
  std::vector<std::pair<int, int>> boundary_edges;   // used once
  std::vector<std::pair<int, int>> nonmanifold_edges;  // used more than twice or same direction
};

// Edge-use check after welding vertices at kEps: every undirected edge must
// be used exactly twice, once in each direction.
WatertightReport watertight_check(const SurfaceMesh& mesh);

// Crossing-parity point-in-mesh test along direction `dir`.
// Returns the number of triangle crossings with t > 0.
int ray_crossings(const SurfaceMesh& mesh, const std::vector<std::array<int, 3>>& triangles,
                  const Vec3& origin, const Vec3& dir);

// First hit along the ray (smallest t > 0), or a negative t when it misses.
struct RayHit {
  double t = -1.0;
  int triangle = -1;
};
RayHit first_hit(const SurfaceMesh& mesh, const std::vector<std::array<int, 3>>& triangles,
                 const Vec3& origin, const Vec3& dir);

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Distance from a point to the closest triangle of the mesh.
double point_mesh_distance(const Vec3& p, const SurfaceMesh& mesh,
                           const std::vector<std::array<int, 3>>& triangles);

void write_obj(const SurfaceMesh& mesh, const std::string& path, bool triangulate = false);
SurfaceMesh read_obj(const std::string& path);

}  // namespace polyrecon
