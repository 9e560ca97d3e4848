#pragma once

#include "sdfilter/mesh.h"
#include "sdfilter/sd_solver.h"

namespace sdfilter {

/// Translates `result` so its vertex centroid matches `reference`.
TriMesh align_centroids(const TriMesh& result, const TriMesh& reference);

/// Mean angle in degrees between corresponding unit rows.
double mean_normal_deviation(const Signal& a, const Signal& b);

/// Mean distance between corresponding vertices.
double mean_vertex_deviation(const TriMesh& a, const TriMesh& b);

}  // namespace sdfilter
