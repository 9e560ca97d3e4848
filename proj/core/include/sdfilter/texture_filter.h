#pragma once

#include <array>
#include <vector>

#include "sdfilter/image.h"
#include "sdfilter/mesh.h"
#include "sdfilter/sd_solver.h"

namespace sdfilter {

/// Texture coordinates for the three corners of every face.
using CornerUVs = std::vector<std::array<Vec2, 3>>;

/// Texture pixels lifted onto the mesh surface.
struct SurfaceSamples {
  Points points;                              ///< 3D position on the surface
  Points colors;                              ///< RGB in [0,1]
  std::vector<std::array<int, 2>> pixels;     ///< (x, y) in the source image
  int skipped_faces = 0;                      ///< faces with degenerate uv triangles

  int size() const { return static_cast<int>(points.rows()); }
};

/// Lifts every pixel whose center lies in some face's uv triangle to the
/// barycentric point on that face. Pixel (x, y) has uv center
/// ((x + 0.5) / W, 1 - (y + 0.5) / H). A pixel claimed by several faces
/// belongs to the lowest face index.
SurfaceSamples lift_texture(const TriMesh& mesh, const CornerUVs& uv, const Image& image);

/// Median 3D distance between samples of horizontally or vertically
/// adjacent pixels; the length unit for texture filter parameters.
/// Throws InvalidArgument when no two adjacent pixels were sampled.
double sample_spacing(const SurfaceSamples& samples);

/// Default parameters for texture filtering: fixed 50 iterations,
/// unconstrained solver.
FilterParams texture_filter_defaults();

/// The SD filter over surface samples, using unit sample weights and
/// spatial weights from 3D point distances. `guidance` may be empty, in
/// which case the sample colors guide the filter.
Signal filter_colors(const SurfaceSamples& samples, const FilterParams& params,
                     const Signal& guidance = {});

/// Copies filtered colors (clamped to [0,1]) into a copy of `image`.
Image write_back(const SurfaceSamples& samples, const Signal& colors, const Image& image);

}  // namespace sdfilter
