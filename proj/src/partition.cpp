#include "polyrecon/partition.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace polyrecon {

int BspTree::leaf_count() const {
  int count = 0;
  for (const BspNode& node : nodes) count += node.is_leaf();
  return count;
}

std::vector<std::pair<int, int>> CellComplex::cell_chain(int cell_id) const {
  // Walk down from the root, descending into the subtree containing the leaf.
  std::vector<std::pair<int, int>> chain;
  std::vector<int> parent(tree.nodes.size(), -1);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (!tree.nodes[i].is_leaf()) {
      parent[static_cast<std::size_t>(tree.nodes[i].below)] = static_cast<int>(i);
      parent[static_cast<std::size_t>(tree.nodes[i].above)] = static_cast<int>(i);
    }
  }
  int leaf = -1;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].is_leaf() && tree.nodes[i].cell == cell_id) {
      leaf = static_cast<int>(i);
      break;
    }
  }
  if (leaf < 0) raise(Errc::BadInput, "unknown cell id");
  int node = leaf;
  while (parent[static_cast<std::size_t>(node)] >= 0) {
    const int up = parent[static_cast<std::size_t>(node)];
    const BspNode& p = tree.nodes[static_cast<std::size_t>(up)];
    chain.emplace_back(p.plane, p.below == node ? +1 : -1);
    node = up;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<int> prioritize(const std::vector<PlanarPrimitive>& primitives) {
  if (primitives.empty()) raise(Errc::BadInput, "no primitives to prioritize");
  std::vector<int> order(primitives.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const PlanarPrimitive& pa = primitives[static_cast<std::size_t>(a)];
    const PlanarPrimitive& pb = primitives[static_cast<std::size_t>(b)];
    if (pa.vertical != pb.vertical) return pa.vertical;
    return pa.area > pb.area;
  });
  return order;
}

namespace {

// Does the cell's cross-section with the primitive plane overlap the support
// polygon by more than kEpsArea?
bool support_overlaps(const ConvexPolyhedron& cell, const Plane& plane,
                      const std::vector<Vec2>& support) {
  if (support.size() < 3) return false;
  const auto section = cross_section(cell, plane);
  if (!section) return false;
  const auto [u, v] = plane_basis(plane.normal);
  std::vector<Vec2> ring;
  ring.reserve(section->points.size());
  for (const Vec3& p : section->points) ring.emplace_back(u.dot(p), v.dot(p));
  const std::vector<Vec2> overlap = convex_polygon_intersect_2d(ring, support);
  return overlap.size() >= 3 && convex_polygon_area_2d(overlap) > kEpsArea;
}

}  // namespace

CellComplex build_cell_complex(const std::vector<PlanarPrimitive>& primitives,
                               const BoundingBox& box, const PartitionOptions& options) {
  if (primitives.empty()) raise(Errc::BadInput, "no primitives");
  if (!box.valid()) raise(Errc::NoCells, "degenerate bounding box");

  CellComplex complex;
  complex.bounds = box.inflated(options.box_margin);
  for (const PlanarPrimitive& prim : primitives) {
    for (const Vec3& p : prim.inliers) {
      if (!complex.bounds.contains(p)) raise(Errc::BadInput, "inlier outside bounding box");
    }
  }
  complex.primitive_order = prioritize(primitives);

  // Leaf polyhedra are kept alongside the growing tree; node ids are stable.
  std::vector<ConvexPolyhedron> leaf_polys;
  complex.tree.nodes.push_back(BspNode{});
  leaf_polys.push_back(make_box(complex.bounds));
  std::vector<int> leaf_nodes{0};

  for (std::size_t t = 0; t < complex.primitive_order.size(); ++t) {
    const PlanarPrimitive& prim =
        primitives[static_cast<std::size_t>(complex.primitive_order[t])];
    const std::vector<Vec2> support = prim.support_hull_2d(options.support_inflation);
    const int plane_id = static_cast<int>(complex.planes.size());
    bool used = false;

    const std::vector<int> snapshot = leaf_nodes;
    for (int node_id : snapshot) {
      BspNode& node = complex.tree.nodes[static_cast<std::size_t>(node_id)];
      ConvexPolyhedron& poly = leaf_polys[static_cast<std::size_t>(node_id)];
      if (!support_overlaps(poly, prim.plane, support)) continue;
      ClipResult split = clip(poly, prim.plane);
      if (!split.below || !split.above) continue;  // grazing contact, no split

      const int below_id = static_cast<int>(complex.tree.nodes.size());
      const int above_id = below_id + 1;
      node.plane = plane_id;
      node.iteration = static_cast<int>(t);
      node.below = below_id;
      node.above = above_id;
      complex.tree.nodes.push_back(BspNode{});
      complex.tree.nodes.push_back(BspNode{});
      leaf_polys.push_back(std::move(*split.below));
      leaf_polys.push_back(std::move(*split.above));
      leaf_nodes.erase(std::find(leaf_nodes.begin(), leaf_nodes.end(), node_id));
      leaf_nodes.push_back(below_id);
      leaf_nodes.push_back(above_id);
      used = true;
      if (static_cast<int>(leaf_nodes.size()) > options.max_cells) {
        raise(Errc::TooManyCells, "leaf count exceeds cap of " + std::to_string(options.max_cells));
      }
    }
    if (used) complex.planes.push_back(prim.plane);
  }

  // Cell ids in depth-first (below-first) leaf order.
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int node_id = stack.back();
    stack.pop_back();
    BspNode& node = complex.tree.nodes[static_cast<std::size_t>(node_id)];
    if (node.is_leaf()) {
      node.cell = static_cast<int>(complex.cells.size());
      complex.cells.push_back(std::move(leaf_polys[static_cast<std::size_t>(node_id)]));
    } else {
      stack.push_back(node.above);
      stack.push_back(node.below);
    }
  }

  complex.adjacency = adjacency(complex.cells);
  return complex;
}

std::vector<std::pair<int, int>> adjacency(const std::vector<ConvexPolyhedron>& cells) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(cells.size());
  for (const ConvexPolyhedron& cell : cells) boxes.push_back(cell.bounds());
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      if (!boxes[i].overlaps(boxes[j])) continue;
      if (shared_facet(cells[i], cells[j])) {
        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return edges;
}

}  // namespace polyrecon
