#include "polyrecon/sampling.hpp"

#include <cmath>
#include <string>

namespace polyrecon {

const char* query_strategy_name(QueryStrategy strategy) {
  switch (strategy) {
    case QueryStrategy::Skeleton: return "skeleton";
    case QueryStrategy::Boundary: return "boundary";
    case QueryStrategy::Volume: return "volume";
  }
  return "unknown";
}

QueryStrategy query_strategy_from_name(const std::string& name) {
  if (name == "skeleton") return QueryStrategy::Skeleton;
  if (name == "boundary") return QueryStrategy::Boundary;
  if (name == "volume") return QueryStrategy::Volume;
  raise(Errc::BadInput, "unknown query strategy '" + name + "'");
}

namespace {

void check_k(int k) {
  if (k < 1) raise(Errc::InvalidK, "query count must be at least 1");
}

// Uniform on the open segment (a, b), keeping kEps away from the endpoints.
Vec3 segment_point(const Vec3& a, const Vec3& b, Rng& rng) {
  const double len = (b - a).norm();
  const double margin = len > 3.0 * kEps ? kEps / len : 1.0 / 3.0;
  const double t = margin + (1.0 - 2.0 * margin) * rng.uniform();
  return a + t * (b - a);
}

}  // namespace

QuerySet skeleton_sample(const ConvexPolyhedron& poly, int k, Rng& rng) {
  check_k(k);
  QuerySet result;
  result.strategy = QueryStrategy::Skeleton;
  result.points.reserve(static_cast<std::size_t>(k));
  const int n_vertices = static_cast<int>(poly.vertices.size());
  if (k <= n_vertices) {
    for (int idx : rng.sample_without_replacement(n_vertices, k)) {
      result.points.push_back(poly.vertices[static_cast<std::size_t>(idx)]);
    }
    return result;
  }
  const int per_segment = k / n_vertices;
  const int extra = k % n_vertices;
  for (int v = 0; v < n_vertices; ++v) {
    for (int i = 0; i < per_segment; ++i) {
      result.points.push_back(segment_point(poly.vertices[static_cast<std::size_t>(v)],
                                            poly.centroid, rng));
    }
  }
  for (int i = 0; i < extra; ++i) {
    result.points.push_back(segment_point(poly.vertices[static_cast<std::size_t>(n_vertices - 1)],
                                          poly.centroid, rng));
  }
  return result;
}

QuerySet boundary_sample(const ConvexPolyhedron& poly, int k, Rng& rng) {
  check_k(k);
  std::vector<double> facet_cdf;
  facet_cdf.reserve(poly.facets.size());
  double total = 0.0;
  for (std::size_t f = 0; f < poly.facets.size(); ++f) {
    total += std::abs(poly.facet_polygon(static_cast<int>(f)).area());
    facet_cdf.push_back(total);
  }
  if (total <= 0.0) raise(Errc::Degenerate, "polyhedron has no boundary area");

  QuerySet result;
  result.strategy = QueryStrategy::Boundary;
  result.points.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double pick = rng.uniform() * total;
    std::size_t f = 0;
    while (f + 1 < facet_cdf.size() && facet_cdf[f] <= pick) ++f;
    const Polygon3 polygon = poly.facet_polygon(static_cast<int>(f));

    // Area-weighted fan triangle within the facet.
    double fan_total = 0.0;
    std::vector<double> fan_cdf;
    fan_cdf.reserve(polygon.points.size() - 2);
    for (std::size_t t = 1; t + 1 < polygon.points.size(); ++t) {
      const Vec3 cross = (polygon.points[t] - polygon.points[0])
                             .cross(polygon.points[t + 1] - polygon.points[0]);
      fan_total += 0.5 * cross.norm();
      fan_cdf.push_back(fan_total);
    }
    const double tri_pick = rng.uniform() * fan_total;
    std::size_t tri = 0;
    while (tri + 1 < fan_cdf.size() && fan_cdf[tri] <= tri_pick) ++tri;
    const Vec3& a = polygon.points[0];
    const Vec3& b = polygon.points[tri + 1];
    const Vec3& c = polygon.points[tri + 2];

    const double sqrt_u = std::sqrt(rng.uniform());
    const double v = rng.uniform();
    result.points.push_back((1.0 - sqrt_u) * a + sqrt_u * (1.0 - v) * b + sqrt_u * v * c);
  }
  return result;
}

QuerySet volume_sample(const ConvexPolyhedron& poly, int k, Rng& rng) {
  check_k(k);
  const BoundingBox box = poly.bounds();
  QuerySet result;
  result.strategy = QueryStrategy::Volume;
  result.points.reserve(static_cast<std::size_t>(k));
  long attempts = 0;
  while (static_cast<int>(result.points.size()) < k) {
    ++attempts;
    const Vec3 p(rng.uniform(box.min.x(), box.max.x()), rng.uniform(box.min.y(), box.max.y()),
                 rng.uniform(box.min.z(), box.max.z()));
    if (contains_point(poly, p)) result.points.push_back(p);
    if (attempts >= 100000 &&
        static_cast<double>(result.points.size()) < 1e-4 * static_cast<double>(attempts)) {
      raise(Errc::RejectionStall, "volume sampling acceptance below 1e-4 (sliver cell)");
    }
  }
  return result;
}

QuerySet sample_queries(const ConvexPolyhedron& poly, int k, QueryStrategy strategy, Rng& rng) {
  switch (strategy) {
    case QueryStrategy::Skeleton: return skeleton_sample(poly, k, rng);
    case QueryStrategy::Boundary: return boundary_sample(poly, k, rng);
    case QueryStrategy::Volume: return volume_sample(poly, k, rng);
  }
  raise(Errc::BadInput, "unknown query strategy");
}

}  // namespace polyrecon
