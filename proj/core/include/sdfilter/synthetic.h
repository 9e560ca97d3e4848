#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdfilter/image.h"
#include "sdfilter/mesh.h"
#include "sdfilter/texture_filter.h"

namespace sdfilter {

/// Unit-radius icosphere with `subdivisions` rounds of 4-to-1 splitting.
TriMesh make_icosphere(int subdivisions, double radius = 1.0);

/// Geodesic sphere: every icosahedron face split into frequency^2
/// triangles and projected to the sphere, 20 * frequency^2 faces.
TriMesh make_geodesic_sphere(int frequency, double radius = 1.0);

/// Flat n x n quad grid on [0, size]^2 in the z = 0 plane, normals +z.
TriMesh make_grid_plane(int n, double size = 1.0);

struct Bump {
  Vec3 center;      ///< on the undisplaced surface
  Vec3 direction;   ///< displacement direction
  double diameter;  ///< support diameter
  double amplitude;
};

/// A mesh plus the analytic bumps that were added to it.
struct SyntheticMesh {
  TriMesh mesh;
  std::vector<Bump> bumps;
  std::vector<Bump> small_bumps;
  /// Centroid spacing of the undisplaced mesh.
  double base_spacing = 0.0;
};

enum class SyntheticKind { SphereBumps, CubeBumps, PlaneChecker, KnotTorus };

struct SyntheticParams {
  SyntheticKind kind = SyntheticKind::SphereBumps;
  int resolution = 4;       ///< icosphere subdivisions or grid cells per side
  double amplitude = 0.05;  ///< feature height; 0 gives the plain surface
  std::uint64_t seed = 1;

  // SphereBumps: bump diameters in units of the base centroid spacing.
  double small_wavelength = 2.0;
  double large_wavelength = 20.0;
  double small_amplitude = 0.0;  ///< 0 means amplitude / 4
  int small_count = 40;
  int large_count = 6;

  // CubeBumps: three bumps of diameter 0.3 per side, kept 0.1 away from
  // the cube edges; signs and positions come from the seed.
  // PlaneChecker: raised checker cells, size as a fraction of the plane side.
  // KnotTorus: tube around a trefoil with `amplitude` ridges.
  double checker_period = 0.25;

  /// Throws InvalidArgument when the parameters cannot produce a mesh.
  void validate() const;
};

SyntheticKind parse_synthetic_kind(const std::string& name);

SyntheticMesh make_synthetic_detailed(const SyntheticParams& params);
TriMesh make_synthetic(const SyntheticParams& params);

/// Displaces every vertex along its area-weighted normal by Gaussian noise
/// with standard deviation sigma * l_c. Deterministic for a given seed.
TriMesh add_normal_noise(const TriMesh& mesh, double sigma, std::uint64_t seed);

/// Square checkerboard with cells of `period` pixels alternating between
/// `a` and `b`.
Image make_checker_texture(int size, int period, const Vec3& a, const Vec3& b);

/// Giraffe-style pattern: `count` dark disks of radius `radius` pixels at
/// seeded positions on a light background.
Image make_spots_texture(int size, double radius, int count, std::uint64_t seed);

/// Texture coordinates from the x/y bounding box, (x, y) -> [0,1]^2.
CornerUVs planar_uv(const TriMesh& mesh);

}  // namespace sdfilter
