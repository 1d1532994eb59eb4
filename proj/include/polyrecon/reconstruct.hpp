#pragma once

#include "polyrecon/mesh.hpp"
#include "polyrecon/partition.hpp"

#include <vector>

namespace polyrecon {

// Extracts the closed surface between interior (label 1) and exterior
// (label 0) cells: every shared facet of a differently-labeled adjacent pair,
// oriented interior -> exterior, plus the bounding-box facets of interior
// cells. Coplanar same-side facets are merged into maximal polygons and all
// rings are made edge-conforming (T-vertices inserted), so the result passes
// watertight_check. Throws EmptyReconstruction when no cell is interior.
SurfaceMesh extract_surface(const CellComplex& complex, const std::vector<int>& labels);

// Number of maximal coplanar connected face groups (planar faces, not
// triangles).
int face_count(const SurfaceMesh& mesh);

}  // namespace polyrecon
