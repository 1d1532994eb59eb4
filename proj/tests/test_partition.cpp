#include "polyrecon/partition.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace polyrecon;

namespace {

// Primitive whose support covers the full cube cross-section of its plane.
PlanarPrimitive full_span(const Plane& plane) {
  const auto [u, v] = plane_basis(plane.normal);
  const Vec3 center = plane.offset * plane.normal;
  std::vector<Vec3> inliers;
  for (const double su : {-2.0, 2.0}) {
    for (const double sv : {-2.0, 2.0}) {
      inliers.push_back(center + su * u + sv * v);
    }
  }
  return make_planar_primitive(plane, inliers);
}

double total_cell_volume(const CellComplex& complex) {
  double volume = 0.0;
  for (const ConvexPolyhedron& cell : complex.cells) volume += cell.volume;
  return volume;
}

BoundingBox unit_box() { return {Vec3::Zero(), Vec3::Ones()}; }

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("prioritize: vertical first, then area, ties stable") {
  std::vector<PlanarPrimitive> prims;
  PlanarPrimitive horizontal_big = full_span(Plane(Vec3::UnitZ(), 0.5));
  horizontal_big.area = 5.0;
  PlanarPrimitive vertical_small = full_span(Plane(Vec3::UnitX(), 0.5));
  vertical_small.area = 1.0;
  prims = {horizontal_big, vertical_small};
  CHECK(prioritize(prims) == std::vector<int>{1, 0});

  PlanarPrimitive v2 = full_span(Plane(Vec3::UnitX(), 0.3));
  v2.area = 2.0;
  PlanarPrimitive v7 = full_span(Plane(Vec3::UnitY(), 0.3));
  v7.area = 7.0;
  prims = {v2, v7};
  CHECK(prioritize(prims) == std::vector<int>{1, 0});

  // Equal class and area keep input order.
  PlanarPrimitive a = full_span(Plane(Vec3::UnitX(), 0.25));
  PlanarPrimitive b = full_span(Plane(Vec3::UnitY(), 0.75));
  a.area = b.area = 3.0;
  prims = {a, b};
  CHECK(prioritize(prims) == std::vector<int>{0, 1});
}

TEST_CASE("single full primitive gives two adjacent cells") {
  const CellComplex complex =
      build_cell_complex({full_span(Plane(Vec3::UnitZ(), 0.5))}, unit_box());
  CHECK(complex.cells.size() == 2);
  REQUIRE(complex.adjacency.size() == 1);
  CHECK(complex.adjacency[0] == std::pair<int, int>(0, 1));
  CHECK(total_cell_volume(complex) ==
        doctest::Approx(complex.bounds.volume()).epsilon(1e-9));
}

TEST_CASE("two orthogonal primitives give a 2x2 grid") {
  const CellComplex complex = build_cell_complex(
      {full_span(Plane(Vec3::UnitZ(), 0.5)), full_span(Plane(Vec3::UnitX(), 0.5))}, unit_box());
  CHECK(complex.cells.size() == 4);
  CHECK(complex.adjacency.size() == 4);
}

TEST_CASE("2x2x2 grid has twelve adjacency edges") {
  const CellComplex complex = build_cell_complex({full_span(Plane(Vec3::UnitX(), 0.5)),
                                                  full_span(Plane(Vec3::UnitY(), 0.5)),
                                                  full_span(Plane(Vec3::UnitZ(), 0.5))},
                                                 unit_box());
  CHECK(complex.cells.size() == 8);
  CHECK(complex.adjacency.size() == 12);
}

TEST_CASE("adaptive split skips cells outside the support hull") {
  // Vertical x=0.5 splits first; the z=0.5 primitive only supports x < 0.5.
  const PlanarPrimitive wall = full_span(Plane(Vec3::UnitX(), 0.5));
  std::vector<Vec3> patch = {{0.02, 0.02, 0.5}, {0.45, 0.02, 0.5}, {0.45, 0.98, 0.5},
                             {0.02, 0.98, 0.5}};
  const PlanarPrimitive half_roof = make_planar_primitive(Plane(Vec3::UnitZ(), 0.5), patch);

  const CellComplex adaptive = build_cell_complex({wall, half_roof}, unit_box());
  CHECK(adaptive.cells.size() == 3);

  const std::vector<ConvexPolyhedron> exhaustive = oracles::exhaustive_partition(
      {wall.plane, half_roof.plane}, adaptive.bounds);
  CHECK(exhaustive.size() == 4);
}

TEST_CASE("tree records iteration indices and chains rebuild cells") {
  const CellComplex complex = build_cell_complex(
      {full_span(Plane(Vec3::UnitX(), 0.5)), full_span(Plane(Vec3::UnitZ(), 0.25))}, unit_box());
  REQUIRE(complex.cells.size() == 4);
  CHECK(complex.tree.leaf_count() == 4);
  std::set<int> iterations;
  for (const BspNode& node : complex.tree.nodes) {
    if (!node.is_leaf()) iterations.insert(node.iteration);
  }
  CHECK(iterations == std::set<int>{0, 1});

  for (std::size_t c = 0; c < complex.cells.size(); ++c) {
    ConvexPolyhedron replay = make_box(complex.bounds);
    for (const auto& [plane_id, side] : complex.cell_chain(static_cast<int>(c))) {
      ClipResult split = clip(replay, complex.planes[static_cast<std::size_t>(plane_id)]);
      auto& keep = side > 0 ? split.below : split.above;
      REQUIRE(keep);
      replay = std::move(*keep);
    }
    CHECK(replay.volume == doctest::Approx(complex.cells[c].volume).epsilon(1e-12));
    CHECK((replay.centroid - complex.cells[c].centroid).norm() < 1e-12);
  }
}

TEST_CASE("random complexes: volume partition, adjacency oracle, adaptivity, conformity") {
  Rng rng(4242);
  for (int round = 0; round < 12; ++round) {
    std::vector<PlanarPrimitive> prims;
    std::vector<Plane> planes;
    const int n_prims = 3 + static_cast<int>(rng.index(5));
    for (int i = 0; i < n_prims; ++i) {
      Vec3 n(rng.normal(), rng.normal(), rng.normal());
      if (n.norm() < 1e-6) n = Vec3::UnitZ();
      const Vec3 anchor(rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85),
                        rng.uniform(0.15, 0.85));
      const Plane plane(n, n.dot(anchor));
      // Bounded random support patch on the plane.
      const auto [u, v] = plane_basis(plane.normal);
      const Vec3 center = anchor;
      std::vector<Vec3> inliers;
      const double ru = rng.uniform(0.1, 0.6);
      const double rv = rng.uniform(0.1, 0.6);
      for (const double su : {-ru, ru}) {
        for (const double sv : {-rv, rv}) {
          inliers.push_back(center + su * u + sv * v);
        }
      }
      prims.push_back(make_planar_primitive(plane, inliers));
      planes.push_back(plane);
    }
    BoundingBox box{Vec3::Constant(-0.2), Vec3::Constant(1.2)};
    const CellComplex complex = build_cell_complex(prims, box);

    // Volume partition.
    CHECK(std::abs(total_cell_volume(complex) - complex.bounds.volume()) <
          1e-6 * complex.bounds.volume());

    // Adjacency equals brute-force all-pairs shared_facet.
    std::vector<std::pair<int, int>> brute;
    for (std::size_t i = 0; i < complex.cells.size(); ++i) {
      for (std::size_t j = i + 1; j < complex.cells.size(); ++j) {
        if (shared_facet(complex.cells[i], complex.cells[j])) {
          brute.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
      }
    }
    CHECK(complex.adjacency == brute);

    // Adaptive leaf count never exceeds the exhaustive reference.
    const auto exhaustive = oracles::exhaustive_partition(planes, box.inflated(0.05));
    CHECK(complex.cells.size() <= exhaustive.size());

    // Conformity: the support of every primitive is covered by complex facets
    // on that plane.
    for (const PlanarPrimitive& prim : prims) {
      const std::vector<Vec2> support = prim.support_hull_2d(0.02);
      const double support_area = convex_polygon_area_2d(support);
      const auto [u, v] = plane_basis(prim.plane.normal);
      double covered = 0.0;
      for (const ConvexPolyhedron& cell : complex.cells) {
        for (std::size_t f = 0; f < cell.facets.size(); ++f) {
          const Halfspace& hs = cell.halfspaces[cell.facets[f].halfspace];
          if (hs.side < 0) continue;  // count each interface once
          if (!hs.plane.approx_equal(prim.plane, 1e-9)) continue;
          const Polygon3 polygon = cell.facet_polygon(static_cast<int>(f));
          std::vector<Vec2> ring;
          for (const Vec3& p : polygon.points) ring.emplace_back(u.dot(p), v.dot(p));
          const auto overlap = convex_polygon_intersect_2d(ring, support);
          if (overlap.size() >= 3) covered += convex_polygon_area_2d(overlap);
        }
      }
      CHECK(covered >= (1.0 - 1e-6) * support_area);
    }
  }
}

TEST_CASE("determinism: identical inputs give identical complexes") {
  std::vector<PlanarPrimitive> prims = {full_span(Plane(Vec3(1, 0.2, 0.1), 0.5)),
                                        full_span(Plane(Vec3(0.1, 1, 0.3), 0.4)),
                                        full_span(Plane(Vec3(0, 0.2, 1), 0.6))};
  const CellComplex a = build_cell_complex(prims, unit_box());
  const CellComplex b = build_cell_complex(prims, unit_box());
  REQUIRE(a.cells.size() == b.cells.size());
  CHECK(a.adjacency == b.adjacency);
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    REQUIRE(a.cells[c].vertices.size() == b.cells[c].vertices.size());
    for (std::size_t i = 0; i < a.cells[c].vertices.size(); ++i) {
      CHECK(a.cells[c].vertices[i] == b.cells[c].vertices[i]);  // bitwise
    }
  }
}

TEST_CASE("errors: empty primitives, bad box, cell cap") {
  CHECK_THROWS_AS(build_cell_complex({}, unit_box()), Error);
  CHECK_THROWS_WITH_AS(
      build_cell_complex({full_span(Plane(Vec3::UnitZ(), 0.5))},
                         BoundingBox{Vec3::Ones(), Vec3::Zero()}),
      doctest::Contains("NoCells"), Error);

  PartitionOptions tight;
  tight.max_cells = 3;
  CHECK_THROWS_WITH_AS(build_cell_complex({full_span(Plane(Vec3::UnitX(), 0.4)),
                                           full_span(Plane(Vec3::UnitY(), 0.4))},
                                          unit_box(), tight),
                       doctest::Contains("TooManyCells"), Error);
}

}  // TEST_SUITE
