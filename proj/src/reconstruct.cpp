#include "polyrecon/reconstruct.hpp"

#include "polyrecon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace polyrecon {

namespace {

using PlaneKey = std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>;

// Orientation-sensitive quantized plane key. Planes of one complex are
// bitwise identical across cells, so quantization never splits a group.
PlaneKey plane_key(const Vec3& normal, double offset) {
  const double q = 1e7;
  return {static_cast<std::int64_t>(std::llround(normal.x() * q)),
          static_cast<std::int64_t>(std::llround(normal.y() * q)),
          static_cast<std::int64_t>(std::llround(normal.z() * q)),
          static_cast<std::int64_t>(std::llround(offset * q))};
}

struct Soup {
  std::vector<Vec3> vertices;            // welded
  std::vector<std::vector<int>> rings;   // indices into vertices
  std::vector<PlaneKey> keys;
  std::vector<Vec3> normals;

  int add_vertex(const Vec3& p) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if ((vertices[i] - p).squaredNorm() <= kEps * kEps) return static_cast<int>(i);
    }
    vertices.push_back(p);
    return static_cast<int>(vertices.size()) - 1;
  }
};

// Inserts every soup vertex that lies strictly inside a ring edge, so that
// coincident edges of neighboring polygons use identical vertex chains.
void make_conforming(Soup& soup) {
  for (std::vector<int>& ring : soup.rings) {
    std::vector<int> refined;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = ring[i];
      const int b = ring[(i + 1) % n];
      refined.push_back(a);
      const Vec3& pa = soup.vertices[static_cast<std::size_t>(a)];
      const Vec3& pb = soup.vertices[static_cast<std::size_t>(b)];
      const Vec3 dir = pb - pa;
      const double len2 = dir.squaredNorm();
      if (len2 <= 4.0 * kEps * kEps) continue;
      std::vector<std::pair<double, int>> on_edge;
      for (std::size_t v = 0; v < soup.vertices.size(); ++v) {
        const int vi = static_cast<int>(v);
        if (vi == a || vi == b) continue;
        const Vec3& p = soup.vertices[v];
        const double t = dir.dot(p - pa) / len2;
        if (t <= kEps || t >= 1.0 - kEps) continue;
        if ((p - (pa + t * dir)).squaredNorm() <= kEps * kEps) on_edge.emplace_back(t, vi);
      }
      std::sort(on_edge.begin(), on_edge.end());
      for (const auto& [t, vi] : on_edge) refined.push_back(vi);
    }
    ring = std::move(refined);
  }
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Groups rings into maximal coplanar edge-connected components.
// Returns component id per ring.
std::vector<int> coplanar_components(const Soup& soup, int& component_count) {
  DisjointSet dsu(soup.rings.size());
  std::map<std::tuple<PlaneKey, int, int>, int> edge_owner;
  for (std::size_t r = 0; r < soup.rings.size(); ++r) {
    const std::vector<int>& ring = soup.rings[r];
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const auto [lo, hi] = std::minmax(ring[i], ring[(i + 1) % ring.size()]);
      const auto key = std::make_tuple(soup.keys[r], lo, hi);
      auto [it, inserted] = edge_owner.emplace(key, static_cast<int>(r));
      if (!inserted) dsu.unite(it->second, static_cast<int>(r));
    }
  }
  std::map<int, int> roots;
  std::vector<int> component(soup.rings.size());
  for (std::size_t r = 0; r < soup.rings.size(); ++r) {
    const int root = dsu.find(static_cast<int>(r));
    auto [it, inserted] = roots.emplace(root, static_cast<int>(roots.size()));
    component[r] = it->second;
  }
  component_count = static_cast<int>(roots.size());
  return component;
}

// Cancels interior directed edges of a component and walks the boundary.
// Returns the merged ring, or empty when the boundary is not a single simple
// loop (holes or pinch points); callers then keep the pieces.
std::vector<int> merge_component(const Soup& soup, const std::vector<std::size_t>& rings) {
  if (rings.size() == 1) return soup.rings[rings.front()];
  std::set<std::pair<int, int>> directed;
  for (std::size_t r : rings) {
    const std::vector<int>& ring = soup.rings[r];
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int a = ring[i];
      const int b = ring[(i + 1) % ring.size()];
      if (directed.count({b, a})) {
        directed.erase({b, a});
      } else if (!directed.insert({a, b}).second) {
        return {};  // same directed edge twice: inconsistent orientation
      }
    }
  }
  if (directed.empty()) return {};
  std::map<int, int> next;
  for (const auto& [a, b] : directed) {
    if (!next.emplace(a, b).second) return {};  // pinch vertex
  }
  std::vector<int> loop;
  const int start = directed.begin()->first;
  int cur = start;
  do {
    loop.push_back(cur);
    auto it = next.find(cur);
    if (it == next.end()) return {};
    cur = it->second;
  } while (cur != start && loop.size() <= directed.size());
  if (loop.size() != directed.size()) return {};  // multiple loops
  return loop;
}

Soup build_soup(const CellComplex& complex, const std::vector<int>& labels) {
  Soup soup;
  auto add_polygon = [&](const std::vector<Vec3>& points, const Vec3& normal, double offset) {
    std::vector<int> ring;
    ring.reserve(points.size());
    for (const Vec3& p : points) {
      const int idx = soup.add_vertex(p);
      if (std::find(ring.begin(), ring.end(), idx) == ring.end()) ring.push_back(idx);
    }
    if (ring.size() < 3) return;
    soup.rings.push_back(std::move(ring));
    soup.keys.push_back(plane_key(normal, offset));
    soup.normals.push_back(normal);
  };

  for (const auto& [i, j] : complex.adjacency) {
    const int li = labels[static_cast<std::size_t>(i)];
    const int lj = labels[static_cast<std::size_t>(j)];
    if (li == lj) continue;
    const int interior = li == 1 ? i : j;
    const int exterior = li == 1 ? j : i;
    const auto facet = shared_facet(complex.cells[static_cast<std::size_t>(interior)],
                                    complex.cells[static_cast<std::size_t>(exterior)]);
    if (!facet) continue;
    add_polygon(facet->points, facet->normal, facet->normal.dot(facet->points.front()));
  }

  // Bounding-box facets of interior cells keep the surface closed.
  std::vector<Plane> box_planes;
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 n = Vec3::Zero();
    n[axis] = 1.0;
    box_planes.emplace_back(n, complex.bounds.max[axis]);
    box_planes.emplace_back(n, complex.bounds.min[axis]);
  }
  for (std::size_t c = 0; c < complex.cells.size(); ++c) {
    if (labels[c] != 1) continue;
    const ConvexPolyhedron& cell = complex.cells[c];
    for (std::size_t f = 0; f < cell.facets.size(); ++f) {
      const Halfspace& hs = cell.halfspaces[static_cast<std::size_t>(cell.facets[f].halfspace)];
      const bool on_box = std::any_of(box_planes.begin(), box_planes.end(),
                                      [&](const Plane& p) { return hs.plane.approx_equal(p); });
      if (!on_box) continue;
      const Polygon3 polygon = cell.facet_polygon(static_cast<int>(f));
      add_polygon(polygon.points, polygon.normal, polygon.normal.dot(polygon.points.front()));
    }
  }
  return soup;
}

}  // namespace

SurfaceMesh extract_surface(const CellComplex& complex, const std::vector<int>& labels) {
  if (labels.size() != complex.cells.size()) {
    raise(Errc::LengthMismatch, "label count does not match cell count");
  }
  if (std::count(labels.begin(), labels.end(), 1) == 0) {
    raise(Errc::EmptyReconstruction, "no interior cell");
  }

  Soup soup = build_soup(complex, labels);
  make_conforming(soup);

  int component_count = 0;
  const std::vector<int> component = coplanar_components(soup, component_count);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(component_count));
  for (std::size_t r = 0; r < soup.rings.size(); ++r) {
    members[static_cast<std::size_t>(component[r])].push_back(r);
  }

  SurfaceMesh mesh;
  mesh.vertices = soup.vertices;
  for (const std::vector<std::size_t>& rings : members) {
    std::vector<int> merged = merge_component(soup, rings);
    if (!merged.empty()) {
      mesh.faces.push_back(std::move(merged));
    } else {
      for (std::size_t r : rings) mesh.faces.push_back(soup.rings[r]);
    }
  }

  // Drop unreferenced vertices (merging removes strictly interior ones).
  std::vector<int> remap(mesh.vertices.size(), -1);
  std::vector<Vec3> compact;
  for (std::vector<int>& ring : mesh.faces) {
    for (int& v : ring) {
      if (remap[static_cast<std::size_t>(v)] < 0) {
        remap[static_cast<std::size_t>(v)] = static_cast<int>(compact.size());
        compact.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
      }
      v = remap[static_cast<std::size_t>(v)];
    }
  }
  mesh.vertices = std::move(compact);
  return mesh;
}

int face_count(const SurfaceMesh& mesh) {
  if (mesh.empty()) return 0;
  Soup soup;
  for (const std::vector<int>& face : mesh.faces) {
    std::vector<int> ring;
    for (int v : face) {
      const int idx = soup.add_vertex(mesh.vertices[static_cast<std::size_t>(v)]);
      if (std::find(ring.begin(), ring.end(), idx) == ring.end()) ring.push_back(idx);
    }
    if (ring.size() < 3) continue;
    // Face plane from the ring itself (meshes from files carry no planes).
    Vec3 normal = Vec3::Zero();
    const Vec3& a = soup.vertices[static_cast<std::size_t>(ring[0])];
    for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
      normal += (soup.vertices[static_cast<std::size_t>(ring[i])] - a)
                    .cross(soup.vertices[static_cast<std::size_t>(ring[i + 1])] - a);
    }
    if (normal.norm() <= kEpsArea) continue;
    normal.normalize();
    soup.rings.push_back(std::move(ring));
    soup.keys.push_back(plane_key(normal, normal.dot(a)));
    soup.normals.push_back(normal);
  }
  make_conforming(soup);
  int component_count = 0;
  coplanar_components(soup, component_count);
  return component_count;
}

}  // namespace polyrecon
