#include "polyrecon/sampling.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace polyrecon;

namespace {

ConvexPolyhedron unit_cube() { return make_box({Vec3::Zero(), Vec3::Ones()}); }

ConvexPolyhedron tetrahedron() {
  std::vector<Halfspace> hs;
  hs.push_back(Halfspace::above(Plane(Vec3::UnitX(), 0.0)));
  hs.push_back(Halfspace::above(Plane(Vec3::UnitY(), 0.0)));
  hs.push_back(Halfspace::above(Plane(Vec3::UnitZ(), 0.0)));
  hs.push_back(Halfspace::below(Plane(Vec3(1, 1, 1), 1.0)));
  return polyhedron_from_halfspaces(hs);
}

// Distance from p to segment (a, b).
double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double t = std::clamp(d.dot(p - a) / d.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("skeleton with k <= |V| returns distinct vertices") {
  const ConvexPolyhedron cube = unit_cube();
  Rng rng(7);
  const QuerySet qs = skeleton_sample(cube, 4, rng);
  REQUIRE(qs.points.size() == 4);
  for (std::size_t i = 0; i < qs.points.size(); ++i) {
    bool is_vertex = false;
    for (const Vec3& v : cube.vertices) is_vertex |= (v - qs.points[i]).norm() < 1e-12;
    CHECK(is_vertex);
    for (std::size_t j = i + 1; j < qs.points.size(); ++j) {
      CHECK((qs.points[i] - qs.points[j]).norm() > 1e-12);
    }
  }
}

TEST_CASE("skeleton k=16 on the cube puts two samples on every vertex-centroid segment") {
  const ConvexPolyhedron cube = unit_cube();
  Rng rng(11);
  const QuerySet qs = skeleton_sample(cube, 16, rng);
  REQUIRE(qs.points.size() == 16);
  std::vector<int> per_segment(cube.vertices.size(), 0);
  for (const Vec3& p : qs.points) {
    CHECK(contains_point(cube, p));
    int owner = -1;
    for (std::size_t v = 0; v < cube.vertices.size(); ++v) {
      if (segment_distance(p, cube.vertices[v], cube.centroid) < 1e-9) {
        owner = static_cast<int>(v);
        break;
      }
    }
    REQUIRE(owner >= 0);
    ++per_segment[static_cast<std::size_t>(owner)];
  }
  for (int count : per_segment) CHECK(count == 2);
}

TEST_CASE("skeleton k=6 on the tetrahedron: one per segment plus two extras on the last") {
  const ConvexPolyhedron tet = tetrahedron();
  REQUIRE(tet.vertices.size() == 4);
  Rng rng(13);
  const QuerySet qs = skeleton_sample(tet, 6, rng);
  REQUIRE(qs.points.size() == 6);
  std::vector<int> per_segment(4, 0);
  for (const Vec3& p : qs.points) {
    CHECK(contains_point(tet, p));
    int owner = -1;
    double best = 1e300;
    for (std::size_t v = 0; v < 4; ++v) {
      const double d = segment_distance(p, tet.vertices[v], tet.centroid);
      if (d < best) {
        best = d;
        owner = static_cast<int>(v);
      }
    }
    REQUIRE(best < 1e-9);
    ++per_segment[static_cast<std::size_t>(owner)];
  }
  CHECK(per_segment == std::vector<int>{1, 1, 1, 3});
}

TEST_CASE("boundary sampling follows facet areas on the cube") {
  const ConvexPolyhedron cube = unit_cube();
  Rng rng(17);
  const QuerySet qs = boundary_sample(cube, 6000, rng);
  REQUIRE(qs.points.size() == 6000);
  std::vector<int> per_facet(6, 0);
  for (const Vec3& p : qs.points) {
    CHECK(contains_point(cube, p));
    for (std::size_t f = 0; f < cube.facets.size(); ++f) {
      const Halfspace& hs = cube.halfspaces[cube.facets[f].halfspace];
      if (std::abs(hs.plane.signed_distance(p)) < 1e-12) {
        ++per_facet[f];
        break;
      }
    }
  }
  // Equal areas: chi-square with 5 dof, p > 0.01 means statistic < 15.09.
  double chi2 = 0.0;
  int total = 0;
  for (int count : per_facet) {
    chi2 += (count - 1000.0) * (count - 1000.0) / 1000.0;
    total += count;
  }
  CHECK(total == 6000);
  CHECK(chi2 < 15.09);
}

TEST_CASE("boundary k=1 lies on a facet plane") {
  const ConvexPolyhedron cube = unit_cube();
  Rng rng(19);
  const QuerySet qs = boundary_sample(cube, 1, rng);
  REQUIRE(qs.points.size() == 1);
  bool on_facet = false;
  for (const Halfspace& hs : cube.halfspaces) {
    on_facet |= std::abs(hs.plane.signed_distance(qs.points[0])) < kEps;
  }
  CHECK(on_facet);
}

TEST_CASE("thin slab concentrates boundary samples on its large facets") {
  const ConvexPolyhedron slab = make_box({Vec3::Zero(), Vec3(1.0, 1.0, 0.01)});
  Rng rng(23);
  const QuerySet qs = boundary_sample(slab, 10000, rng);
  int on_large = 0;
  for (const Vec3& p : qs.points) {
    if (std::abs(p.z()) < 1e-12 || std::abs(p.z() - 0.01) < 1e-12) ++on_large;
  }
  // Large facets hold 2 / 2.04 ~ 98% of the area.
  CHECK(on_large >= 9700);
}

TEST_CASE("volume sampling is uniform (mean test) and contained") {
  Rng rng(29);
  const QuerySet cube_qs = volume_sample(unit_cube(), 10000, rng);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : cube_qs.points) mean += p;
  mean /= 10000.0;
  // Per-axis sigma of U(0,1) mean over 1e4 samples is ~0.00289.
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::abs(mean[axis] - 0.5) < 4.0 * 0.00289);
  }

  Rng rng2(31);
  const ConvexPolyhedron tet = tetrahedron();
  const QuerySet tet_qs = volume_sample(tet, 10000, rng2);
  Vec3 tmean = Vec3::Zero();
  for (const Vec3& p : tet_qs.points) {
    CHECK(contains_point(tet, p));
    tmean += p;
  }
  tmean /= 10000.0;
  // Simplex marginals are Beta(1,3): sigma ~ 0.1936.
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(std::abs(tmean[axis] - 0.25) < 4.0 * 0.1936 / 100.0);
  }
}

TEST_CASE("every strategy returns exactly k contained points on random cells") {
  Rng source(37);
  for (int round = 0; round < 25; ++round) {
    const ConvexPolyhedron cell = oracles::random_cell(source);
    for (const QueryStrategy strategy :
         {QueryStrategy::Skeleton, QueryStrategy::Boundary, QueryStrategy::Volume}) {
      for (const int k : {1, 4, 16, 64}) {
        Rng rng(derive_seed(1000, static_cast<std::uint64_t>(round),
                            static_cast<std::uint64_t>(k)));
        const QuerySet qs = sample_queries(cell, k, strategy, rng);
        REQUIRE(static_cast<int>(qs.points.size()) == k);
        for (const Vec3& p : qs.points) CHECK(contains_point(cell, p));
      }
    }
  }
}

TEST_CASE("identical seeds give identical query sets") {
  Rng source(41);
  const ConvexPolyhedron cell = oracles::random_cell(source);
  for (const QueryStrategy strategy :
       {QueryStrategy::Skeleton, QueryStrategy::Boundary, QueryStrategy::Volume}) {
    Rng a(123456);
    Rng b(123456);
    const QuerySet qa = sample_queries(cell, 16, strategy, a);
    const QuerySet qb = sample_queries(cell, 16, strategy, b);
    REQUIRE(qa.points.size() == qb.points.size());
    for (std::size_t i = 0; i < qa.points.size(); ++i) {
      CHECK(qa.points[i] == qb.points[i]);  // bitwise
    }
  }
}

TEST_CASE("k = 0 is rejected") {
  Rng rng(43);
  const ConvexPolyhedron cube = unit_cube();
  CHECK_THROWS_WITH_AS(skeleton_sample(cube, 0, rng), doctest::Contains("InvalidK"), Error);
  CHECK_THROWS_WITH_AS(boundary_sample(cube, 0, rng), doctest::Contains("InvalidK"), Error);
  CHECK_THROWS_WITH_AS(volume_sample(cube, 0, rng), doctest::Contains("InvalidK"), Error);
}

TEST_CASE("volume sampling stalls on slivers") {
  // A cell thinner than 1e-4 of its bounding box along a diagonal.
  const ConvexPolyhedron cube = unit_cube();
  const Vec3 n = Vec3(1, 1, 1).normalized();
  const ClipResult a = clip(cube, Plane(n, 0.02));
  REQUIRE(a.below);
  const ClipResult b = clip(*a.below, Plane(n, 0.02 - 2e-5));
  REQUIRE(b.above);
  Rng rng(47);
  CHECK_THROWS_WITH_AS(volume_sample(*b.above, 4, rng), doctest::Contains("RejectionStall"),
                       Error);
}

}  // TEST_SUITE
