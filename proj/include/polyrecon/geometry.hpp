#pragma once

#include "polyrecon/common.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace polyrecon {

// Oriented plane {p : normal.dot(p) = offset} with unit normal and canonical
// sign (largest-magnitude normal component positive), so equal planes compare
// equal regardless of construction order.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  Plane() = default;
  Plane(const Vec3& n, double d);
  static Plane through(const Vec3& point, const Vec3& n) { return Plane(n, n.dot(point)); }

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
  bool approx_equal(const Plane& other, double eps = kEps) const;
};

// One side of a canonical plane. side = +1 keeps normal.dot(p) <= offset,
// side = -1 keeps normal.dot(p) >= offset.
struct Halfspace {
  Plane plane;
  int side = +1;

  static Halfspace below(const Plane& p) { return {p, +1}; }
  static Halfspace above(const Plane& p) { return {p, -1}; }

  // Outward normal of the boundary facet, pointing away from the interior.
  Vec3 outward_normal() const { return static_cast<double>(side) * plane.normal; }
  bool contains(const Vec3& p, double eps = kEps) const {
    return static_cast<double>(side) * plane.signed_distance(p) <= eps;
  }
};

// Planar primitive: supporting plane plus the inlier points it was fitted
// to. `area` is the area of the inliers' 2D convex hull on the plane;
// `vertical` marks wall-like planes (|normal_z| < kVerticalityCos).
struct PlanarPrimitive {
  Plane plane;
  std::vector<Vec3> inliers;
  double area = 0.0;
  bool vertical = false;

  // Inlier convex hull on the plane, inflated about its centroid, as 2D
  // coordinates in the plane_basis frame of the canonical normal.
  std::vector<Vec2> support_hull_2d(double inflation) const;
};

// Computes area/verticality and validates that every inlier lies within
// `inlier_distance` of the plane.
PlanarPrimitive make_planar_primitive(const Plane& plane, std::vector<Vec3> inliers,
                                      double inlier_distance = 0.01);

struct BoundingBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double volume() const { return extent().prod(); }
  double largest_side() const { return extent().maxCoeff(); }
  bool valid() const { return (max.array() > min.array()).all(); }
  bool contains(const Vec3& p, double eps = kEps) const {
    return (p.array() >= min.array() - eps).all() && (p.array() <= max.array() + eps).all();
  }
  BoundingBox inflated(double fraction) const;
  void expand(const Vec3& p);
  bool overlaps(const BoundingBox& other, double eps = kEps) const {
    return (min.array() <= other.max.array() + eps).all() &&
           (other.min.array() <= max.array() + eps).all();
  }
};

// Planar convex polygon embedded in 3D. `plane` carries the orientation the
// ring is counter-clockwise about.
struct Polygon3 {
  std::vector<Vec3> points;
  Vec3 normal = Vec3::UnitZ();

  double area() const;
  Vec3 centroid() const;
};

// Facet ring indices are counter-clockwise about the facet's outward normal.
struct Facet {
  int halfspace = -1;  // index into ConvexPolyhedron::halfspaces
  std::vector<int> ring;
};

// Bounded convex cell kept in both half-space and vertex form. Instances are
// produced by make_box / polyhedron_from_halfspaces / clip, which keep the
// two forms consistent.
struct ConvexPolyhedron {
  std::vector<Halfspace> halfspaces;
  std::vector<Vec3> vertices;
  std::vector<Facet> facets;
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();

  BoundingBox bounds() const;
  Polygon3 facet_polygon(int facet_index) const;
  Vec3 facet_outward_normal(int facet_index) const {
    return halfspaces[static_cast<std::size_t>(facets[static_cast<std::size_t>(facet_index)].halfspace)]
        .outward_normal();
  }
};

struct ClipResult {
  std::optional<ConvexPolyhedron> below;
  std::optional<ConvexPolyhedron> above;
};

ConvexPolyhedron make_box(const BoundingBox& box);

// Intersects the oriented half-spaces. The intersection must be bounded with
// nonempty interior; throws Unbounded / Empty / Degenerate otherwise.
ConvexPolyhedron polyhedron_from_halfspaces(const std::vector<Halfspace>& halfspaces);

// Splits `poly` by `plane`. Vertices within kEps of the plane are shared by
// both pieces; a poly lying entirely on one side is passed through unsplit.
ClipResult clip(const ConvexPolyhedron& poly, const Plane& plane);

// Cross-section polygon of `poly` with `plane` (counter-clockwise about the
// plane normal), or nullopt when the section is empty or degenerate.
std::optional<Polygon3> cross_section(const ConvexPolyhedron& poly, const Plane& plane);

// The positive-area polygon where the boundaries of `a` and `b` coincide on a
// common plane with opposite outward orientation.
std::optional<Polygon3> shared_facet(const ConvexPolyhedron& a, const ConvexPolyhedron& b);

bool contains_point(const ConvexPolyhedron& poly, const Vec3& p, double eps = kEps);

// --- 2D helpers (used by partition and the tests' oracles as well) ---

// Orthonormal in-plane basis (u, v) with u x v = normal.
std::pair<Vec3, Vec3> plane_basis(const Vec3& normal);

double convex_polygon_area_2d(const std::vector<Vec2>& ring);

// Convex hull in counter-clockwise order; collinear points dropped.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points);

// Sutherland-Hodgman intersection of two convex CCW rings.
std::vector<Vec2> convex_polygon_intersect_2d(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

}  // namespace polyrecon
