#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sdfilter/mesh.h"

namespace sdfilter {

struct VertexUpdateParams {
  double closeness_weight = 0.001;
  int iterations = 20;

  void validate() const;
};

struct ProjectionResult {
  Eigen::Matrix3d positions;  ///< rows are the projected, mean-centered vertices
  bool degenerate = false;    ///< true when the face had to collapse to a segment
};

/// Closest mean-centered vertex triple whose oriented normal is `target`.
///
/// The centered positions are projected onto the plane orthogonal to the
/// target. If the face currently points away from the target the projection
/// would be flipped, and the closest feasible configuration is the rank-one
/// truncation of the projected triple (three colinear points).
ProjectionResult project_to_oriented_normal(const Eigen::Matrix3d& face_positions,
                                            const Vec3& target_normal);

/// Alternating minimization of
///   w |V - V0|^2 + sum_f dist(M V_f, C_f)^2
/// where C_f holds the vertex triples with oriented normal n_f.
///
/// The global system w I + K^T K depends only on connectivity and w; it is
/// factorized once in the constructor and reused by every solve. solve() is
/// const and may run concurrently from several threads.
///
/// Vertices flagged in `pinned` keep their reference positions; the global
/// step then minimizes over the remaining vertices only.
class VertexUpdater {
 public:
  VertexUpdater(const TriMesh& mesh, double closeness_weight, std::vector<char> pinned = {});
  ~VertexUpdater();
  VertexUpdater(VertexUpdater&&) noexcept;
  VertexUpdater& operator=(VertexUpdater&&) noexcept;

  struct Result {
    Points positions;
    /// Objective after every half step (projection, then global solve).
    std::vector<double> objective_trace;
    /// Projections that collapsed a face during the final iteration.
    int degenerate_projections = 0;
  };

  Result solve(const Points& reference, const Points& target_normals, int iterations) const;

  /// Projection step: one centered 3x3 block per face.
  std::vector<Eigen::Matrix3d> project(const Points& positions, const Points& target_normals,
                                       int* degenerate_count = nullptr) const;
  /// Global step: solves (w I + K^T K) V = w V0 + K^T P over the free
  /// vertices.
  Points global_step(const Points& reference, const std::vector<Eigen::Matrix3d>& projections) const;
  /// w I + K^T K.
  const Eigen::SparseMatrix<double>& system_matrix() const;
  /// w V0 + K^T P.
  Points system_rhs(const Points& reference, const std::vector<Eigen::Matrix3d>& projections) const;
  double objective(const Points& positions, const Points& reference,
                   const std::vector<Eigen::Matrix3d>& projections) const;

  double closeness_weight() const { return weight_; }
  int pinned_count() const;

 private:
  struct Factorization;
  TriMesh mesh_;
  double weight_;
  std::unique_ptr<Factorization> factor_;
};

/// Convenience wrapper: reference = current vertices.
TriMesh update_vertices(const TriMesh& mesh, const Points& target_normals,
                        const VertexUpdateParams& params = {});

struct ConsistencyReport {
  std::vector<double> deviation_degrees;  ///< per face
  int flips = 0;                          ///< faces with negative dot product
  double mean_deviation_degrees = 0.0;
};

/// Angle between achieved and target oriented normals per face.
ConsistencyReport normal_consistency_report(const TriMesh& mesh, const Points& target_normals);

}  // namespace sdfilter
