#include "polyrecon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace polyrecon {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::Unbounded: return "Unbounded";
    case Errc::Empty: return "Empty";
    case Errc::Degenerate: return "Degenerate";
    case Errc::NoCells: return "NoCells";
    case Errc::TooManyCells: return "TooManyCells";
    case Errc::InvalidK: return "InvalidK";
    case Errc::RejectionStall: return "RejectionStall";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::QueryOutOfRange: return "QueryOutOfRange";
    case Errc::MixedK: return "MixedK";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptRecord: return "CorruptRecord";
    case Errc::NonWatertight: return "NonWatertight";
    case Errc::EmptyScan: return "EmptyScan";
    case Errc::EmptyReconstruction: return "EmptyReconstruction";
    case Errc::EmptyMesh: return "EmptyMesh";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::CheckpointMismatch: return "CheckpointMismatch";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::DatasetEmpty: return "DatasetEmpty";
    case Errc::Timeout: return "Timeout";
    case Errc::BadInput: return "BadInput";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

Plane::Plane(const Vec3& n, double d) {
  const double len = n.norm();
  if (len < kEps) raise(Errc::BadInput, "plane normal too short");
  normal = n / len;
  offset = d / len;
  int dominant = 0;
  normal.cwiseAbs().maxCoeff(&dominant);
  if (normal[dominant] < 0.0) {
    normal = -normal;
    offset = -offset;
  }
}

bool Plane::approx_equal(const Plane& other, double eps) const {
  return (normal - other.normal).norm() <= eps && std::abs(offset - other.offset) <= eps;
}

BoundingBox BoundingBox::inflated(double fraction) const {
  const Vec3 pad = 0.5 * fraction * extent();
  return {min - pad, max + pad};
}

void BoundingBox::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

double Polygon3::area() const {
  if (points.size() < 3) return 0.0;
  Vec3 cross_sum = Vec3::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    cross_sum += points[i].cross(points[(i + 1) % points.size()]);
  }
  return 0.5 * normal.dot(cross_sum);
}

Vec3 Polygon3::centroid() const {
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  if (!points.empty()) mean /= static_cast<double>(points.size());
  double weight_sum = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& a = points[i];
    const Vec3& b = points[(i + 1) % points.size()];
    const double w = normal.dot((a - mean).cross(b - mean));
    weight_sum += w;
    weighted += w * (mean + a + b);
  }
  if (std::abs(weight_sum) < kEpsArea) return mean;
  return weighted / (3.0 * weight_sum);
}

BoundingBox ConvexPolyhedron::bounds() const {
  BoundingBox box{vertices.front(), vertices.front()};
  for (const Vec3& v : vertices) box.expand(v);
  return box;
}

Polygon3 ConvexPolyhedron::facet_polygon(int facet_index) const {
  const Facet& f = facets[static_cast<std::size_t>(facet_index)];
  Polygon3 poly;
  poly.normal = facet_outward_normal(facet_index);
  poly.points.reserve(f.ring.size());
  for (int v : f.ring) poly.points.push_back(vertices[static_cast<std::size_t>(v)]);
  return poly;
}

namespace {

// Signed volume (positive when facet rings are CCW about outward normals)
// and volume centroid via a tetrahedron fan around the vertex mean.
void measure(const std::vector<Vec3>& vertices, const std::vector<Facet>& facets, double& volume,
             Vec3& centroid) {
  Vec3 ref = Vec3::Zero();
  for (const Vec3& v : vertices) ref += v;
  if (!vertices.empty()) ref /= static_cast<double>(vertices.size());
  double six_volume = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const Facet& f : facets) {
    if (f.ring.size() < 3) continue;
    const Vec3& a = vertices[static_cast<std::size_t>(f.ring[0])];
    for (std::size_t i = 1; i + 1 < f.ring.size(); ++i) {
      const Vec3& b = vertices[static_cast<std::size_t>(f.ring[i])];
      const Vec3& c = vertices[static_cast<std::size_t>(f.ring[i + 1])];
      const double det = (a - ref).dot((b - ref).cross(c - ref));
      six_volume += det;
      moment += det * ((a - ref) + (b - ref) + (c - ref));
    }
  }
  volume = six_volume / 6.0;
  centroid = (std::abs(six_volume) > 0.0) ? Vec3(ref + moment / (4.0 * six_volume)) : ref;
}

// Merges vertices closer than kEps, rewrites facet rings, drops collapsed
// rings (and their half-spaces), then recomputes volume and centroid.
void finalize(ConvexPolyhedron& poly) {
  const double cell = 4.0 * kEps;
  auto key_of = [cell](const Vec3& p, int dx, int dy, int dz) {
    const auto qx = static_cast<std::int64_t>(std::floor(p.x() / cell)) + dx;
    const auto qy = static_cast<std::int64_t>(std::floor(p.y() / cell)) + dy;
    const auto qz = static_cast<std::int64_t>(std::floor(p.z() / cell)) + dz;
    return std::tuple<std::int64_t, std::int64_t, std::int64_t>(qx, qy, qz);
  };
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<int>> grid;
  std::vector<int> remap(poly.vertices.size(), -1);
  std::vector<Vec3> unique_vertices;
  unique_vertices.reserve(poly.vertices.size());
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    const Vec3& p = poly.vertices[i];
    int found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx)
      for (int dy = -1; dy <= 1 && found < 0; ++dy)
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          auto it = grid.find(key_of(p, dx, dy, dz));
          if (it == grid.end()) continue;
          for (int candidate : it->second) {
            if ((unique_vertices[static_cast<std::size_t>(candidate)] - p).squaredNorm() <=
                kEps * kEps) {
              found = candidate;
              break;
            }
          }
        }
    if (found < 0) {
      found = static_cast<int>(unique_vertices.size());
      unique_vertices.push_back(p);
      grid[key_of(p, 0, 0, 0)].push_back(found);
    }
    remap[i] = found;
  }

  std::vector<Facet> kept_facets;
  std::vector<Halfspace> kept_halfspaces;
  for (const Facet& f : poly.facets) {
    std::vector<int> ring;
    ring.reserve(f.ring.size());
    for (int v : f.ring) {
      const int m = remap[static_cast<std::size_t>(v)];
      if (std::find(ring.begin(), ring.end(), m) == ring.end()) ring.push_back(m);
    }
    if (ring.size() < 3) continue;
    Facet nf;
    nf.halfspace = static_cast<int>(kept_halfspaces.size());
    nf.ring = std::move(ring);
    kept_halfspaces.push_back(poly.halfspaces[static_cast<std::size_t>(f.halfspace)]);
    kept_facets.push_back(std::move(nf));
  }
  poly.vertices = std::move(unique_vertices);
  poly.facets = std::move(kept_facets);
  poly.halfspaces = std::move(kept_halfspaces);
  measure(poly.vertices, poly.facets, poly.volume, poly.centroid);
}

enum class Side : std::uint8_t { Below, On, Above };

Side classify(double signed_distance) {
  if (signed_distance < -kEps) return Side::Below;
  if (signed_distance > kEps) return Side::Above;
  return Side::On;
}

struct PieceBuilder {
  ConvexPolyhedron piece;
  std::vector<int> vertex_map;  // old vertex -> piece vertex (-1 = absent)

  explicit PieceBuilder(std::size_t n_old) : vertex_map(n_old, -1) {}

  int map_old(int old_index, const std::vector<Vec3>& old_vertices) {
    int& slot = vertex_map[static_cast<std::size_t>(old_index)];
    if (slot < 0) {
      slot = static_cast<int>(piece.vertices.size());
      piece.vertices.push_back(old_vertices[static_cast<std::size_t>(old_index)]);
    }
    return slot;
  }
};

// Sorts cap-ring points counter-clockwise about `normal` and drops
// near-duplicates.
std::vector<Vec3> order_section_ring(std::vector<Vec3> points, const Vec3& normal) {
  if (points.size() < 3) return points;
  Vec3 center = Vec3::Zero();
  for (const Vec3& p : points) center += p;
  center /= static_cast<double>(points.size());
  const auto [u, v] = plane_basis(normal);
  std::sort(points.begin(), points.end(), [&](const Vec3& a, const Vec3& b) {
    const Vec3 da = a - center;
    const Vec3 db = b - center;
    return std::atan2(v.dot(da), u.dot(da)) < std::atan2(v.dot(db), u.dot(db));
  });
  std::vector<Vec3> ring;
  for (const Vec3& p : points) {
    if (ring.empty() || (ring.back() - p).norm() > kEps) ring.push_back(p);
  }
  while (ring.size() >= 2 && (ring.front() - ring.back()).norm() <= kEps) ring.pop_back();
  return ring;
}

}  // namespace

ConvexPolyhedron make_box(const BoundingBox& box) {
  if (!box.valid()) raise(Errc::NoCells, "degenerate bounding box");
  const Vec3& lo = box.min;
  const Vec3& hi = box.max;
  ConvexPolyhedron poly;
  poly.vertices = {
      {lo.x(), lo.y(), lo.z()}, {hi.x(), lo.y(), lo.z()}, {hi.x(), hi.y(), lo.z()},
      {lo.x(), hi.y(), lo.z()}, {lo.x(), lo.y(), hi.z()}, {hi.x(), lo.y(), hi.z()},
      {hi.x(), hi.y(), hi.z()}, {lo.x(), hi.y(), hi.z()},
  };
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    poly.halfspaces.push_back(Halfspace::below(Plane(n, hi[axis])));
    poly.halfspaces.push_back(Halfspace::above(Plane(n, lo[axis])));
  }
  poly.facets = {
      {0, {1, 2, 6, 5}},  // x = max
      {1, {0, 4, 7, 3}},  // x = min
      {2, {2, 3, 7, 6}},  // y = max
      {3, {0, 1, 5, 4}},  // y = min
      {4, {4, 5, 6, 7}},  // z = max
      {5, {0, 3, 2, 1}},  // z = min
  };
  measure(poly.vertices, poly.facets, poly.volume, poly.centroid);
  return poly;
}

ClipResult clip(const ConvexPolyhedron& poly, const Plane& plane) {
  std::vector<double> dist(poly.vertices.size());
  std::vector<Side> side(poly.vertices.size());
  int n_below = 0;
  int n_above = 0;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    dist[i] = plane.signed_distance(poly.vertices[i]);
    side[i] = classify(dist[i]);
    n_below += side[i] == Side::Below;
    n_above += side[i] == Side::Above;
  }

  ClipResult result;
  if (n_above == 0) {
    result.below = poly;
    return result;
  }
  if (n_below == 0) {
    result.above = poly;
    return result;
  }

  // Crossing point per strictly-split edge, computed once so both pieces (and
  // later shared-facet queries between them) see bitwise-identical vertices.
  std::map<std::pair<int, int>, Vec3> crossings;
  auto crossing_point = [&](int a, int b) -> const Vec3& {
    const auto key = std::minmax(a, b);
    auto it = crossings.find(key);
    if (it == crossings.end()) {
      const double t = dist[static_cast<std::size_t>(key.first)] /
                       (dist[static_cast<std::size_t>(key.first)] -
                        dist[static_cast<std::size_t>(key.second)]);
      const Vec3 p = poly.vertices[static_cast<std::size_t>(key.first)] +
                     t * (poly.vertices[static_cast<std::size_t>(key.second)] -
                          poly.vertices[static_cast<std::size_t>(key.first)]);
      it = crossings.emplace(key, p).first;
    }
    return it->second;
  };

  std::vector<Vec3> section_points;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    if (side[i] == Side::On) section_points.push_back(poly.vertices[i]);
  }

  auto build_piece = [&](bool keep_below) -> std::optional<ConvexPolyhedron> {
    const Side discard = keep_below ? Side::Above : Side::Below;
    const Side strict_keep = keep_below ? Side::Below : Side::Above;
    PieceBuilder builder(poly.vertices.size());
    for (const Facet& f : poly.facets) {
      std::vector<int> ring;
      bool has_strict = false;
      const std::size_t n = f.ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const int a = f.ring[i];
        const int b = f.ring[(i + 1) % n];
        const Side sa = side[static_cast<std::size_t>(a)];
        const Side sb = side[static_cast<std::size_t>(b)];
        if (sa != discard) {
          ring.push_back(builder.map_old(a, poly.vertices));
          has_strict |= sa == strict_keep;
        }
        if ((sa == Side::Below && sb == Side::Above) || (sa == Side::Above && sb == Side::Below)) {
          const Vec3& p = crossing_point(a, b);
          const int idx = static_cast<int>(builder.piece.vertices.size());
          builder.piece.vertices.push_back(p);
          ring.push_back(idx);
        }
      }
      if (!has_strict || ring.size() < 3) continue;
      Facet nf;
      nf.halfspace = static_cast<int>(builder.piece.halfspaces.size());
      nf.ring = std::move(ring);
      builder.piece.halfspaces.push_back(poly.halfspaces[static_cast<std::size_t>(f.halfspace)]);
      builder.piece.facets.push_back(std::move(nf));
    }

    // Cap facet on the cutting plane, CCW about the piece's outward normal.
    std::vector<Vec3> cap = section_points;
    for (const auto& [key, p] : crossings) cap.push_back(p);
    const Vec3 outward = keep_below ? Vec3(plane.normal) : Vec3(-plane.normal);
    cap = order_section_ring(std::move(cap), outward);
    if (cap.size() >= 3) {
      Facet nf;
      nf.halfspace = static_cast<int>(builder.piece.halfspaces.size());
      for (const Vec3& p : cap) {
        nf.ring.push_back(static_cast<int>(builder.piece.vertices.size()));
        builder.piece.vertices.push_back(p);
      }
      builder.piece.halfspaces.push_back(keep_below ? Halfspace::below(plane)
                                                    : Halfspace::above(plane));
      builder.piece.facets.push_back(std::move(nf));
    }
    finalize(builder.piece);
    if (builder.piece.vertices.size() < 4 || builder.piece.facets.size() < 4 ||
        builder.piece.volume <= 0.0) {
      return std::nullopt;
    }
    return builder.piece;
  };

  result.below = build_piece(true);
  result.above = build_piece(false);
  if (!result.below || !result.above) {
    // Grazing cut: hand the original to the side holding its centroid.
    result.below.reset();
    result.above.reset();
    if (plane.signed_distance(poly.centroid) <= 0.0) {
      result.below = poly;
    } else {
      result.above = poly;
    }
  }
  return result;
}

ConvexPolyhedron polyhedron_from_halfspaces(const std::vector<Halfspace>& halfspaces) {
  constexpr double kBigBound = 1e6;
  BoundingBox world{Vec3::Constant(-kBigBound), Vec3::Constant(kBigBound)};
  ConvexPolyhedron poly = make_box(world);
  for (const Halfspace& hs : halfspaces) {
    ClipResult split = clip(poly, hs.plane);
    std::optional<ConvexPolyhedron>& keep = hs.side > 0 ? split.below : split.above;
    if (!keep) {
      double closest = std::numeric_limits<double>::max();
      for (const Vec3& v : poly.vertices) {
        closest = std::min(closest, std::abs(hs.plane.signed_distance(v)));
      }
      raise(closest <= kEps ? Errc::Degenerate : Errc::Empty,
            "half-space intersection has no interior");
    }
    poly = std::move(*keep);
  }
  for (const Vec3& v : poly.vertices) {
    if (v.cwiseAbs().maxCoeff() >= kBigBound * (1.0 - 1e-6)) {
      raise(Errc::Unbounded, "half-space intersection is not bounded");
    }
  }
  // Interior thinner than kEps in some facet direction counts as degenerate.
  for (const Halfspace& hs : poly.halfspaces) {
    double depth = 0.0;
    for (const Vec3& v : poly.vertices) {
      depth = std::max(depth, -static_cast<double>(hs.side) * hs.plane.signed_distance(v));
    }
    if (depth < kEps) raise(Errc::Degenerate, "half-space intersection thinner than tolerance");
  }
  return poly;
}

std::optional<Polygon3> cross_section(const ConvexPolyhedron& poly, const Plane& plane) {
  std::vector<double> dist(poly.vertices.size());
  int n_below = 0;
  int n_above = 0;
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
    dist[i] = plane.signed_distance(poly.vertices[i]);
    const Side s = classify(dist[i]);
    n_below += s == Side::Below;
    n_above += s == Side::Above;
    if (s == Side::On) points.push_back(poly.vertices[i]);
  }
  if (n_below == 0 || n_above == 0) return std::nullopt;
  std::set<std::pair<int, int>> seen;
  for (const Facet& f : poly.facets) {
    const std::size_t n = f.ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = f.ring[i];
      const int b = f.ring[(i + 1) % n];
      const Side sa = classify(dist[static_cast<std::size_t>(a)]);
      const Side sb = classify(dist[static_cast<std::size_t>(b)]);
      if ((sa == Side::Below && sb == Side::Above) || (sa == Side::Above && sb == Side::Below)) {
        const auto key = std::minmax(a, b);
        if (!seen.insert(key).second) continue;
        const double t = dist[static_cast<std::size_t>(key.first)] /
                         (dist[static_cast<std::size_t>(key.first)] -
                          dist[static_cast<std::size_t>(key.second)]);
        points.push_back(poly.vertices[static_cast<std::size_t>(key.first)] +
                         t * (poly.vertices[static_cast<std::size_t>(key.second)] -
                              poly.vertices[static_cast<std::size_t>(key.first)]));
      }
    }
  }
  Polygon3 section;
  section.normal = plane.normal;
  section.points = order_section_ring(std::move(points), plane.normal);
  if (section.points.size() < 3 || section.area() < kEpsArea) return std::nullopt;
  return section;
}

std::optional<Polygon3> shared_facet(const ConvexPolyhedron& a, const ConvexPolyhedron& b) {
  for (std::size_t fa = 0; fa < a.facets.size(); ++fa) {
    const Halfspace& ha = a.halfspaces[static_cast<std::size_t>(a.facets[fa].halfspace)];
    for (std::size_t fb = 0; fb < b.facets.size(); ++fb) {
      const Halfspace& hb = b.halfspaces[static_cast<std::size_t>(b.facets[fb].halfspace)];
      if (ha.side == hb.side) continue;  // same orientation cannot face each other
      if (!ha.plane.approx_equal(hb.plane, 1e-7)) continue;
      const auto [u, v] = plane_basis(ha.plane.normal);
      auto project = [&](const ConvexPolyhedron& poly, const Facet& f,
                         bool reverse) -> std::vector<Vec2> {
        std::vector<Vec2> ring;
        ring.reserve(f.ring.size());
        for (int idx : f.ring) {
          const Vec3& p = poly.vertices[static_cast<std::size_t>(idx)];
          ring.emplace_back(u.dot(p), v.dot(p));
        }
        if (reverse) std::reverse(ring.begin(), ring.end());
        return ring;
      };
      // Rings are CCW about the outward normal; flip the one whose outward
      // normal opposes the canonical plane normal.
      const std::vector<Vec2> ring_a = project(a, a.facets[fa], ha.side < 0);
      const std::vector<Vec2> ring_b = project(b, b.facets[fb], hb.side < 0);
      const std::vector<Vec2> overlap = convex_polygon_intersect_2d(ring_a, ring_b);
      if (overlap.size() < 3 || convex_polygon_area_2d(overlap) <= kEpsArea) continue;
      Polygon3 poly;
      poly.normal = ha.outward_normal();
      const bool flip = ha.side < 0;
      for (std::size_t i = 0; i < overlap.size(); ++i) {
        const Vec2& q = flip ? overlap[overlap.size() - 1 - i] : overlap[i];
        poly.points.push_back(q.x() * u + q.y() * v + ha.plane.offset * ha.plane.normal);
      }
      return poly;
    }
  }
  return std::nullopt;
}

bool contains_point(const ConvexPolyhedron& poly, const Vec3& p, double eps) {
  for (const Halfspace& hs : poly.halfspaces) {
    if (!hs.contains(p, eps)) return false;
  }
  return true;
}

std::vector<Vec2> PlanarPrimitive::support_hull_2d(double inflation) const {
  const auto [u, v] = plane_basis(plane.normal);
  std::vector<Vec2> projected;
  projected.reserve(inliers.size());
  for (const Vec3& p : inliers) projected.emplace_back(u.dot(p), v.dot(p));
  std::vector<Vec2> hull = convex_hull_2d(std::move(projected));
  if (hull.empty()) return hull;
  Vec2 center = Vec2::Zero();
  for (const Vec2& p : hull) center += p;
  center /= static_cast<double>(hull.size());
  for (Vec2& p : hull) p = center + (1.0 + inflation) * (p - center);
  return hull;
}

PlanarPrimitive make_planar_primitive(const Plane& plane, std::vector<Vec3> inliers,
                                      double inlier_distance) {
  for (const Vec3& p : inliers) {
    if (std::abs(plane.signed_distance(p)) > inlier_distance) {
      raise(Errc::BadInput, "primitive inlier farther than inlier_distance from its plane");
    }
  }
  PlanarPrimitive prim;
  prim.plane = plane;
  prim.inliers = std::move(inliers);
  prim.vertical = std::abs(plane.normal.z()) < kVerticalityCos;
  prim.area = convex_polygon_area_2d(prim.support_hull_2d(0.0));
  return prim;
}

std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
  int smallest = 0;
  normal.cwiseAbs().minCoeff(&smallest);
  Vec3 axis = Vec3::Zero();
  axis[smallest] = 1.0;
  const Vec3 u = normal.cross(axis).normalized();
  const Vec3 v = normal.cross(u);
  return {u, v};
}

double convex_polygon_area_2d(const std::vector<Vec2>& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % ring.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> points) {
  if (points.size() < 3) return points;
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return (a - b).norm() <= kEps; }),
               points.end());
  if (points.size() < 3) return points;
  auto turn = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * points.size());
  std::size_t h = 0;
  for (const Vec2& p : points) {
    while (h >= 2 && turn(hull[h - 2], hull[h - 1], p) <= kEpsArea) --h;
    hull[h++] = p;
  }
  const std::size_t lower = h + 1;
  for (auto it = points.rbegin() + 1; it != points.rend(); ++it) {
    while (h >= lower && turn(hull[h - 2], hull[h - 1], *it) <= kEpsArea) --h;
    hull[h++] = *it;
  }
  hull.resize(h - 1);
  return hull;
}

std::vector<Vec2> convex_polygon_intersect_2d(const std::vector<Vec2>& a,
                                              const std::vector<Vec2>& b) {
  std::vector<Vec2> output = a;
  for (std::size_t i = 0; i < b.size() && !output.empty(); ++i) {
    const Vec2& p0 = b[i];
    const Vec2& p1 = b[(i + 1) % b.size()];
    const Vec2 edge = p1 - p0;
    const double len = edge.norm();
    if (len <= kEps) continue;
    auto inside = [&](const Vec2& q) {
      return (edge.x() * (q.y() - p0.y()) - edge.y() * (q.x() - p0.x())) / len >= -kEps;
    };
    std::vector<Vec2> input = std::move(output);
    output.clear();
    for (std::size_t j = 0; j < input.size(); ++j) {
      const Vec2& cur = input[j];
      const Vec2& nxt = input[(j + 1) % input.size()];
      const bool cur_in = inside(cur);
      const bool nxt_in = inside(nxt);
      if (cur_in) output.push_back(cur);
      if (cur_in != nxt_in) {
        const double dc = edge.x() * (cur.y() - p0.y()) - edge.y() * (cur.x() - p0.x());
        const double dn = edge.x() * (nxt.y() - p0.y()) - edge.y() * (nxt.x() - p0.x());
        const double t = dc / (dc - dn);
        output.push_back(cur + t * (nxt - cur));
      }
    }
  }
  return output;
}

}  // namespace polyrecon
