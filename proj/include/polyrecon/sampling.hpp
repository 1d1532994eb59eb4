#pragma once

#include "polyrecon/geometry.hpp"
#include "polyrecon/rng.hpp"

#include <vector>

namespace polyrecon {

enum class QueryStrategy : std::uint8_t { Skeleton = 0, Boundary = 1, Volume = 2 };

const char* query_strategy_name(QueryStrategy strategy);
QueryStrategy query_strategy_from_name(const std::string& name);

struct QuerySet {
  std::vector<Vec3> points;  // exactly k, all inside the closed cell
  QueryStrategy strategy = QueryStrategy::Skeleton;
  int cell = -1;
};

// k distinct vertices when k <= |V|; otherwise floor(k/|V|) points on every
// vertex-centroid segment plus k mod |V| extras on the last segment.
QuerySet skeleton_sample(const ConvexPolyhedron& poly, int k, Rng& rng);

// Facet chosen with area-proportional probability, then an area-weighted fan
// triangle, then a uniform barycentric point.
QuerySet boundary_sample(const ConvexPolyhedron& poly, int k, Rng& rng);

// Uniform over the volume via rejection from the cell's bounding box.
QuerySet volume_sample(const ConvexPolyhedron& poly, int k, Rng& rng);

QuerySet sample_queries(const ConvexPolyhedron& poly, int k, QueryStrategy strategy, Rng& rng);

}  // namespace polyrecon
