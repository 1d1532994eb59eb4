#pragma once

#include "polyrecon/geometry.hpp"

#include <cstdint>
#include <vector>

namespace polyrecon {

// Binary tree recording the splitting history. Internal nodes carry the
// splitting plane and the iteration (primitive rank) that introduced it;
// leaves map one-to-one onto cells of the complex.
struct BspNode {
  int plane = -1;      // index into CellComplex::planes (internal nodes)
  int iteration = -1;  // t of the primitive that split this node
  int below = -1;      // child node ids, -1 for leaves
  int above = -1;
  int cell = -1;       // cell id (leaves)

  bool is_leaf() const { return below < 0; }
};

struct BspTree {
  std::vector<BspNode> nodes;  // nodes[0] is the root

  int leaf_count() const;
};

struct CellComplex {
  BoundingBox bounds;                           // partitioned region (inflated input box)
  std::vector<Plane> planes;                    // splitting planes, indexed by tree nodes
  std::vector<ConvexPolyhedron> cells;          // leaves in tree order
  BspTree tree;
  std::vector<std::pair<int, int>> adjacency;   // undirected, i < j, positive shared area
  std::vector<int> primitive_order;             // input primitive ids in priority order

  // Root-to-leaf clip chain of one cell: (plane id, side) pairs. Replaying
  // the chain over `bounds` reproduces the cell bitwise.
  std::vector<std::pair<int, int>> cell_chain(int cell_id) const;
};

struct PartitionOptions {
  double box_margin = 0.05;        // inflation of the input box
  double support_inflation = 0.02; // inflation of the inlier hull used as support
  int max_cells = 4096;
};

// Vertical primitives first, then descending area; ties keep input order.
std::vector<int> prioritize(const std::vector<PlanarPrimitive>& primitives);

// Adaptive binary space partitioning: primitive t splits only the current
// leaf cells whose cross-section overlaps its support polygon.
CellComplex build_cell_complex(const std::vector<PlanarPrimitive>& primitives,
                               const BoundingBox& box, const PartitionOptions& options = {});

// Edges between cells with a positive-area shared facet. Pairs are
// prefiltered by bounding-box overlap; the result equals the all-pairs scan.
std::vector<std::pair<int, int>> adjacency(const std::vector<ConvexPolyhedron>& cells);

}  // namespace polyrecon
