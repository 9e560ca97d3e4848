#include "sdfilter/metrics.h"

#include <cmath>
#include <numbers>

#include "sdfilter/errors.h"

namespace sdfilter {

TriMesh align_centroids(const TriMesh& result, const TriMesh& reference) {
  if (result.num_vertices() != reference.num_vertices()) {
    throw InvalidArgument("meshes have different vertex counts");
  }
  if (result.num_vertices() == 0) return result;
  const Eigen::RowVector3d shift =
      reference.vertices().colwise().mean() - result.vertices().colwise().mean();
  Points moved = result.vertices().rowwise() + shift;
  return result.with_vertices(std::move(moved));
}

double mean_normal_deviation(const Signal& a, const Signal& b) {
  if (a.rows() != b.rows() || a.cols() != 3 || b.cols() != 3) {
    throw InvalidArgument("normal sets differ in size");
  }
  if (a.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vec3 x = a.row(i).transpose();
    const Vec3 y = b.row(i).transpose();
    sum += std::atan2(x.cross(y).norm(), x.dot(y));
  }
  return sum / static_cast<double>(a.rows()) * 180.0 / std::numbers::pi;
}

double mean_vertex_deviation(const TriMesh& a, const TriMesh& b) {
  if (a.num_vertices() != b.num_vertices()) {
    throw InvalidArgument("meshes have different vertex counts");
  }
  if (a.num_vertices() == 0) return 0.0;
  return (a.vertices() - b.vertices()).rowwise().norm().mean();
}

}  // namespace sdfilter
