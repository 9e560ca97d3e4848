#pragma once

#include "sdfilter/mesh.h"
#include "sdfilter/sd_solver.h"

namespace sdfilter {

/// The initial signal, unchanged.
inline Signal identity_guidance(const Signal& signal) { return signal; }

/// Patch-based static guidance for denoising.
///
/// Every face f spawns a candidate patch: the faces whose centroids lie
/// within `patch_radius` of c_f (reached through vertex-sharing adjacency).
/// Each patch is scored by its largest pairwise normal difference plus the
/// area-weighted variance of its normals about their mean. A face takes the
/// normalized area-weighted mean normal of the best-scoring patch among the
/// patches that contain it.
Signal patch_guidance(const TriMesh& mesh, const FaceGeometry& geom, const Signal& normals,
                      double patch_radius);

}  // namespace sdfilter
