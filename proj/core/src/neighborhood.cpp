#include "sdfilter/neighborhood.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "sdfilter/errors.h"
#include "sdfilter/kernels.h"

namespace sdfilter {

namespace {

// Adds every missing reverse pair, then packs the rows with their weights.
Neighborhoods pack_symmetric(std::vector<std::vector<int>>& rows, const Points& positions,
                             double eta) {
  const int n = static_cast<int>(rows.size());
  std::vector<std::vector<int>> extra(n);
  for (int i = 0; i < n; ++i) {
    for (int j : rows[i]) {
      if (!std::binary_search(rows[j].begin(), rows[j].end(), i)) extra[j].push_back(i);
    }
  }
  Neighborhoods out;
  out.offsets.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    if (!extra[i].empty()) {
      rows[i].insert(rows[i].end(), extra[i].begin(), extra[i].end());
      std::sort(rows[i].begin(), rows[i].end());
    }
    out.offsets[i + 1] = out.offsets[i] + static_cast<int>(rows[i].size());
  }
  out.indices.resize(out.offsets.back());
  out.spatial_weights.resize(out.offsets.back());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    int k = out.offsets[i];
    for (int j : rows[i]) {
      out.indices[k] = j;
      out.spatial_weights[k] =
          kernel_phi_sq((positions.row(i) - positions.row(j)).squaredNorm(), eta);
      ++k;
    }
  }
  return out;
}

}  // namespace

Neighborhoods build_neighborhoods(const TriMesh& mesh, const FaceGeometry& geom, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  const int nf = mesh.num_faces();
  const double radius_sq = 9.0 * eta * eta;
  std::vector<std::vector<int>> rows(nf);

#pragma omp parallel
  {
    std::vector<int> stamp(nf, -1);
    std::vector<int> queue;
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < nf; ++i) {
      if (geom.is_degenerate(i)) continue;
      auto& row = rows[i];
      queue.clear();
      queue.push_back(i);
      stamp[i] = i;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (int j : mesh.face_neighbors(queue[head])) {
          if (stamp[j] == i) continue;
          stamp[j] = i;
          if (geom.is_degenerate(j)) continue;
          if ((geom.centroids.row(j) - geom.centroids.row(i)).squaredNorm() > radius_sq) continue;
          queue.push_back(j);
          row.push_back(j);
        }
      }
      std::sort(row.begin(), row.end());
    }
  }
  return pack_symmetric(rows, geom.centroids, eta);
}

Neighborhoods build_point_neighborhoods(const Points& points, double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  const int n = static_cast<int>(points.rows());
  const double cell = 3.0 * eta;
  const double radius_sq = cell * cell;
  std::vector<std::vector<int>> rows(n);
  if (n == 0) return pack_symmetric(rows, points, eta);

  const Eigen::RowVector3d lo = points.colwise().minCoeff();
  auto cell_of = [&](int i) {
    Eigen::Array3i c;
    for (int d = 0; d < 3; ++d) c[d] = static_cast<int>(std::floor((points(i, d) - lo[d]) / cell));
    return c;
  };
  auto key = [](int x, int y, int z) {
    return (static_cast<std::int64_t>(x) << 42) ^ (static_cast<std::int64_t>(y) << 21) ^
           static_cast<std::int64_t>(z);
  };
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  for (int i = 0; i < n; ++i) {
    const auto c = cell_of(i);
    grid[key(c[0], c[1], c[2])].push_back(i);
  }

#pragma omp parallel for schedule(dynamic, 256)
  for (int i = 0; i < n; ++i) {
    const auto c = cell_of(i);
    auto& row = rows[i];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (c[0] + dx < 0 || c[1] + dy < 0 || c[2] + dz < 0) continue;
          auto it = grid.find(key(c[0] + dx, c[1] + dy, c[2] + dz));
          if (it == grid.end()) continue;
          for (int j : it->second) {
            if (j != i && (points.row(j) - points.row(i)).squaredNorm() <= radius_sq) {
              row.push_back(j);
            }
          }
        }
      }
    }
    std::sort(row.begin(), row.end());
  }
  return pack_symmetric(rows, points, eta);
}

}  // namespace sdfilter
