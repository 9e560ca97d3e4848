#include "sdfilter/guidance.h"

#include <algorithm>
#include <limits>

#include "sdfilter/errors.h"
#include "sdfilter/neighborhood.h"

namespace sdfilter {

Signal patch_guidance(const TriMesh& mesh, const FaceGeometry& geom, const Signal& normals,
                      double patch_radius) {
  if (!(patch_radius > 0.0)) throw InvalidArgument("patch radius must be positive");
  const int nf = mesh.num_faces();
  if (normals.rows() != nf || normals.cols() != 3) {
    throw InvalidArgument("patch guidance needs one 3D normal per face");
  }
  // Neighborhoods of radius 3 * eta = patch_radius; patch j = {j} + N(j).
  const Neighborhoods nb = build_neighborhoods(mesh, geom, patch_radius / 3.0);

  std::vector<double> score(nf, std::numeric_limits<double>::infinity());
  Points mean = Points::Zero(nf, 3);

#pragma omp parallel
  {
    std::vector<int> members;
#pragma omp for schedule(dynamic, 32)
    for (int j = 0; j < nf; ++j) {
      if (geom.is_degenerate(j)) continue;
      members.assign(1, j);
      const auto ns = nb.neighbors(j);
      members.insert(members.end(), ns.begin(), ns.end());

      Vec3 sum = Vec3::Zero();
      double area = 0.0;
      for (int k : members) {
        sum += geom.areas[k] * normals.row(k).transpose();
        area += geom.areas[k];
      }
      double max_diff_sq = 0.0;
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          max_diff_sq = std::max(
              max_diff_sq, (normals.row(members[a]) - normals.row(members[b])).squaredNorm());
        }
      }
      const double len = sum.norm();
      if (!(len > 0.0)) continue;
      const Vec3 avg = max_diff_sq == 0.0 ? Vec3(normals.row(j).transpose()) : Vec3(sum / len);
      double variance = 0.0;
      for (int k : members) {
        variance += geom.areas[k] * (normals.row(k).transpose() - avg).squaredNorm();
      }
      score[j] = std::sqrt(max_diff_sq) + variance / area;
      mean.row(j) = avg.transpose();
    }
  }

  Signal guidance(nf, 3);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nf; ++i) {
    int best = i;
    for (int j : nb.neighbors(i)) {
      if (score[j] < score[best]) best = j;
    }
    if (std::isfinite(score[best])) {
      guidance.row(i) = mean.row(best);
    } else {
      guidance.row(i) = normals.row(i);
    }
  }
  return guidance;
}

}  // namespace sdfilter
