#include "polyrecon/geometry.hpp"
#include "polyrecon/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace polyrecon;

namespace {

std::vector<Halfspace> unit_cube_halfspaces() {
  std::vector<Halfspace> hs;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    hs.push_back(Halfspace::below(Plane(n, 1.0)));
    hs.push_back(Halfspace::above(Plane(n, 0.0)));
  }
  return hs;
}

double facet_area_weighted_normal_residual(const ConvexPolyhedron& poly) {
  Vec3 sum = Vec3::Zero();
  for (std::size_t f = 0; f < poly.facets.size(); ++f) {
    const Polygon3 polygon = poly.facet_polygon(static_cast<int>(f));
    sum += polygon.area() * polygon.normal;
  }
  return sum.norm();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("plane canonical sign makes equal planes compare equal") {
  const Plane a(Vec3(0, 0, 2), 1.0);
  const Plane b(Vec3(0, 0, -1), -0.5);
  CHECK(a.approx_equal(b));
  CHECK(a.normal.z() == doctest::Approx(1.0));
  CHECK(a.offset == doctest::Approx(0.5));
  CHECK(std::abs(a.normal.norm() - 1.0) < 1e-12);
}

TEST_CASE("unit cube from half-spaces") {
  const ConvexPolyhedron cube = polyhedron_from_halfspaces(unit_cube_halfspaces());
  CHECK(cube.vertices.size() == 8);
  CHECK(cube.facets.size() == 6);
  CHECK(cube.volume == doctest::Approx(1.0).epsilon(1e-9));
  CHECK((cube.centroid - Vec3(0.5, 0.5, 0.5)).norm() < 1e-9);
}

TEST_CASE("standard simplex from half-spaces") {
  std::vector<Halfspace> hs;
  hs.push_back(Halfspace::above(Plane(Vec3::UnitX(), 0.0)));
  hs.push_back(Halfspace::above(Plane(Vec3::UnitY(), 0.0)));
  hs.push_back(Halfspace::above(Plane(Vec3::UnitZ(), 0.0)));
  hs.push_back(Halfspace::below(Plane(Vec3(1, 1, 1), 1.0)));
  const ConvexPolyhedron simplex = polyhedron_from_halfspaces(hs);
  CHECK(simplex.vertices.size() == 4);
  CHECK(simplex.volume == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("unbounded and empty intersections are reported") {
  std::vector<Halfspace> open;
  open.push_back(Halfspace::above(Plane(Vec3::UnitZ(), 0.0)));
  CHECK_THROWS_WITH_AS(polyhedron_from_halfspaces(open), doctest::Contains("Unbounded"), Error);

  std::vector<Halfspace> empty = unit_cube_halfspaces();
  empty.push_back(Halfspace::above(Plane(Vec3::UnitZ(), 2.0)));
  CHECK_THROWS_WITH_AS(polyhedron_from_halfspaces(empty), doctest::Contains("Empty"), Error);

  std::vector<Halfspace> thin = unit_cube_halfspaces();
  thin.push_back(Halfspace::above(Plane(Vec3::UnitZ(), 1.0 - 1e-12)));
  CHECK_THROWS_WITH_AS(polyhedron_from_halfspaces(thin), doctest::Contains("Degenerate"), Error);
}

TEST_CASE("random tangent planes of a sphere against the Monte-Carlo oracle") {
  const double radius = 0.35;
  const Vec3 center(0.5, 0.5, 0.5);
  Rng rng(20240117);
  std::vector<Halfspace> hs;
  for (int i = 0; i < 20; ++i) {
    Vec3 n(rng.normal(), rng.normal(), rng.normal());
    n.normalize();
    hs.push_back(Halfspace::below(Plane(n, n.dot(center) + radius)));
  }
  const ConvexPolyhedron poly = polyhedron_from_halfspaces(hs);
  CHECK(poly.volume >= 4.0 / 3.0 * M_PI * radius * radius * radius);

  const auto mc = oracles::mc_volume(poly, 1000000, 7);
  CHECK(std::abs(poly.volume - mc.volume) < 3.0 * mc.stderr_volume);
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::abs(poly.centroid[axis] - mc.centroid[axis]) <
          4.0 * mc.stderr_centroid[axis] + 1e-6);
  }
}

TEST_CASE("clip: axis split, miss, and corner tetrahedron") {
  const ConvexPolyhedron cube = make_box({Vec3::Zero(), Vec3::Ones()});

  SUBCASE("z = 0.5 splits into equal halves") {
    const ClipResult split = clip(cube, Plane(Vec3::UnitZ(), 0.5));
    REQUIRE(split.below);
    REQUIRE(split.above);
    CHECK(split.below->volume == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(split.above->volume == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("z = 2 leaves the cube untouched") {
    const ClipResult split = clip(cube, Plane(Vec3::UnitZ(), 2.0));
    REQUIRE(split.below);
    CHECK(!split.above);
    CHECK(split.below->volume == doctest::Approx(1.0));
    CHECK(split.below->vertices.size() == 8);
  }

  SUBCASE("x+y+z = 0.5 cuts off the corner tetrahedron") {
    const ClipResult split = clip(cube, Plane(Vec3(1, 1, 1), 0.5));
    REQUIRE(split.below);
    REQUIRE(split.above);
    CHECK(split.below->volume == doctest::Approx(0.5 * 0.5 * 0.5 / 6.0).epsilon(1e-9));
    CHECK(split.below->vertices.size() == 4);
  }
}

TEST_CASE("clip conservation on random cells and planes") {
  Rng rng(99);
  for (int round = 0; round < 200; ++round) {
    const ConvexPolyhedron poly = oracles::random_cell(rng);
    Vec3 n(rng.normal(), rng.normal(), rng.normal());
    if (n.norm() < 1e-6) n = Vec3::UnitX();
    const Vec3 anchor = poly.centroid + 0.3 * Vec3(rng.normal(), rng.normal(), rng.normal());
    const ClipResult split = clip(poly, Plane(n, n.dot(anchor)));
    const double below = split.below ? split.below->volume : 0.0;
    const double above = split.above ? split.above->volume : 0.0;
    CHECK(std::abs(below + above - poly.volume) < 1e-9 * poly.volume);
  }
}

TEST_CASE("round trip through half-space form reproduces vertices") {
  Rng rng(1234);
  for (int round = 0; round < 50; ++round) {
    const ConvexPolyhedron poly = oracles::random_cell(rng);
    const ConvexPolyhedron rebuilt = polyhedron_from_halfspaces(poly.halfspaces);
    REQUIRE(rebuilt.vertices.size() == poly.vertices.size());
    for (const Vec3& v : poly.vertices) {
      double best = 1e300;
      for (const Vec3& w : rebuilt.vertices) best = std::min(best, (v - w).norm());
      CHECK(best < 1e-6);
    }
  }
}

TEST_CASE("facet closure: area-weighted outward normals cancel") {
  Rng rng(555);
  for (int round = 0; round < 100; ++round) {
    const ConvexPolyhedron poly = oracles::random_cell(rng);
    CHECK(facet_area_weighted_normal_residual(poly) < 1e-9);
  }
}

TEST_CASE("analytic volume matches rejection sampling within 3 standard errors") {
  Rng rng(31415);
  for (int round = 0; round < 5; ++round) {
    const ConvexPolyhedron poly = oracles::random_cell(rng);
    const auto mc = oracles::mc_volume(poly, 1000000, 100 + static_cast<std::uint64_t>(round));
    CHECK(std::abs(poly.volume - mc.volume) < 3.0 * mc.stderr_volume);
  }
}

TEST_CASE("shared facet of cube halves is the splitting square") {
  const ConvexPolyhedron cube = make_box({Vec3::Zero(), Vec3::Ones()});
  const ClipResult split = clip(cube, Plane(Vec3::UnitZ(), 0.5));
  const auto facet = shared_facet(*split.below, *split.above);
  REQUIRE(facet);
  CHECK(std::abs(facet->area()) == doctest::Approx(1.0).epsilon(1e-9));
  for (const Vec3& p : facet->points) CHECK(p.z() == doctest::Approx(0.5));
  // Oriented from below-cell toward above-cell.
  CHECK(facet->normal.z() == doctest::Approx(1.0));
}

TEST_CASE("cubes touching along an edge share no facet") {
  const ConvexPolyhedron a = make_box({Vec3::Zero(), Vec3::Ones()});
  const ConvexPolyhedron b = make_box({Vec3(1.0, 1.0, 0.0), Vec3(2.0, 2.0, 1.0)});
  CHECK(!shared_facet(a, b));
}

TEST_CASE("shared facet area agrees with rasterization oracle") {
  // Three-plane partition of the cube; compare a mid-complex pair.
  const ConvexPolyhedron cube = make_box({Vec3::Zero(), Vec3::Ones()});
  const Plane p1(Vec3(1, 0.3, 0), 0.55);
  const Plane p2(Vec3(0, 1, 0.2), 0.5);
  const Plane p3(Vec3(0.1, 0, 1), 0.45);
  std::vector<ConvexPolyhedron> cells = oracles::exhaustive_partition({p1, p2, p3},
                                                                      {Vec3::Zero(), Vec3::Ones()});
  REQUIRE(cells.size() == 8);
  int checked = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      const auto facet = shared_facet(cells[i], cells[j]);
      if (!facet) continue;
      ++checked;
      // Locate the two source facets on the shared plane for the oracle.
      const double analytic = std::abs(facet->area());
      double rasterized = -1.0;
      for (std::size_t fa = 0; fa < cells[i].facets.size(); ++fa) {
        for (std::size_t fb = 0; fb < cells[j].facets.size(); ++fb) {
          const Halfspace& ha = cells[i].halfspaces[cells[i].facets[fa].halfspace];
          const Halfspace& hb = cells[j].halfspaces[cells[j].facets[fb].halfspace];
          if (ha.side == hb.side || !ha.plane.approx_equal(hb.plane, 1e-7)) continue;
          rasterized = oracles::rasterized_overlap_area(
              cells[i].facet_polygon(static_cast<int>(fa)),
              cells[j].facet_polygon(static_cast<int>(fb)), ha.plane.normal, 1e-3);
        }
      }
      REQUIRE(rasterized >= 0.0);
      CHECK(std::abs(analytic - rasterized) < 0.01 * std::max(analytic, 0.05));
    }
  }
  CHECK(checked >= 8);
}

TEST_CASE("contains_point basics") {
  const ConvexPolyhedron cube = make_box({Vec3::Zero(), Vec3::Ones()});
  CHECK(contains_point(cube, Vec3(0.5, 0.5, 0.5)));
  CHECK(!contains_point(cube, Vec3(1.5, 0.0, 0.0)));
  CHECK(contains_point(cube, Vec3(1.0, 1.0, 1.0)));  // boundary counts
}

TEST_CASE("primitive area and verticality") {
  std::vector<Vec3> wall = {{0, 0, 0}, {2, 0, 0}, {2, 0, 1}, {0, 0, 1}};
  const PlanarPrimitive prim = make_planar_primitive(Plane(Vec3::UnitY(), 0.0), wall);
  CHECK(prim.vertical);
  CHECK(prim.area == doctest::Approx(2.0));

  std::vector<Vec3> roof = {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  const PlanarPrimitive flat = make_planar_primitive(Plane(Vec3::UnitZ(), 1.0), roof);
  CHECK(!flat.vertical);
  CHECK(flat.area == doctest::Approx(1.0));

  CHECK_THROWS_AS(make_planar_primitive(Plane(Vec3::UnitZ(), 0.0), {{0.0, 0.0, 0.5}}), Error);
}

}  // TEST_SUITE
