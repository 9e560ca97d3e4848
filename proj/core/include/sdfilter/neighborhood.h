#pragma once

#include <span>
#include <vector>

#include "sdfilter/mesh.h"

namespace sdfilter {

/// Per-element neighbor lists with cached spatial Gaussian weights.
///
/// Lists are sorted by neighbor index, never contain the element itself, and
/// are symmetric: j is listed for i exactly when i is listed for j.
struct Neighborhoods {
  std::vector<int> offsets{0};
  std::vector<int> indices;
  std::vector<double> spatial_weights;

  int size() const { return static_cast<int>(offsets.size()) - 1; }
  std::span<const int> neighbors(int i) const {
    return {indices.data() + offsets[i], indices.data() + offsets[i + 1]};
  }
  std::span<const double> weights(int i) const {
    return {spatial_weights.data() + offsets[i], spatial_weights.data() + offsets[i + 1]};
  }
  std::size_t total_pairs() const { return indices.size(); }
};

/// Faces within 3*eta of each face centroid, found by breadth-first search
/// over vertex-sharing adjacency. The search only expands through faces that
/// pass the distance test. Degenerate faces are neither listed nor searched
/// from. Throws InvalidArgument if eta <= 0.
Neighborhoods build_neighborhoods(const TriMesh& mesh, const FaceGeometry& geom, double eta);

/// Points within 3*eta of each point, found with a uniform grid of cell size
/// 3*eta. Throws InvalidArgument if eta <= 0.
Neighborhoods build_point_neighborhoods(const Points& points, double eta);

}  // namespace sdfilter
