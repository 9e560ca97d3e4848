#include "sdfilter/param_select.h"

#include <algorithm>
#include <cmath>

#include "sdfilter/errors.h"

namespace sdfilter {

RegionStats region_stats(const FaceGeometry& geom, const Signal& normals,
                         std::span<const int> region) {
  if (region.empty()) throw InvalidArgument("region is empty");
  Vec3 sum = Vec3::Zero();
  double area = 0.0;
  for (int f : region) {
    if (f < 0 || f >= geom.size()) {
      throw InvalidArgument("region references missing face " + std::to_string(f));
    }
    sum += geom.areas[f] * normals.row(f).transpose();
    area += geom.areas[f];
  }
  const double len = sum.norm();
  if (!(len > 1e-12 * std::max(area, 1e-300))) {
    throw InvalidArgument("region normals cancel out; select another region");
  }
  RegionStats s;
  s.mean_normal = sum / len;
  double var = 0.0;
  for (int f : region) var += geom.areas[f] * (normals.row(f).transpose() - s.mean_normal).squaredNorm();
  s.variance = var / area;
  return s;
}

NuRange nu_range(const RegionStats& a, const RegionStats& b, double mu_factor) {
  if (!(mu_factor >= 1.0 && mu_factor <= 10.0)) {
    throw InvalidArgument("mu factor must lie in [1, 10]");
  }
  NuRange r;
  r.nu_min = 0.5 * std::max(std::sqrt(a.variance), std::sqrt(b.variance));
  r.nu_max = (a.mean_normal - b.mean_normal).norm() / 3.0;
  r.accepted = !(r.nu_max < r.nu_min);
  if (r.accepted) {
    r.nu = 0.5 * (r.nu_min + r.nu_max);
    r.mu = mu_factor * r.nu;
  }
  return r;
}

}  // namespace sdfilter
