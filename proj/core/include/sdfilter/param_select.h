#pragma once

#include <span>

#include "sdfilter/mesh.h"
#include "sdfilter/sd_solver.h"

namespace sdfilter {

struct RegionStats {
  Vec3 mean_normal = Vec3::UnitZ();
  double variance = 0.0;
};

/// Area-weighted mean normal and variance of a face region. Throws
/// InvalidArgument for an empty region or a vanishing normal sum.
RegionStats region_stats(const FaceGeometry& geom, const Signal& normals,
                         std::span<const int> region);

struct NuRange {
  double nu_min = 0.0;
  double nu_max = 0.0;
  bool accepted = false;
  double nu = 0.0;  ///< (nu_min + nu_max) / 2 when accepted
  double mu = 0.0;  ///< mu_factor * nu when accepted
};

inline constexpr double kDefaultMuFactor = 5.0;

/// nu_min = max(sigma_1, sigma_2) / 2, nu_max = |n_1 - n_2| / 3. The pair is
/// rejected when nu_max < nu_min. mu_factor must lie in [1, 10].
NuRange nu_range(const RegionStats& a, const RegionStats& b, double mu_factor = kDefaultMuFactor);

}  // namespace sdfilter
