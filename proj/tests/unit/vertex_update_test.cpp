#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "sdfilter/errors.h"
#include "sdfilter/mesh.h"
#include "sdfilter/synthetic.h"
#include "sdfilter/vertex_update.h"
#include "test_support.h"

namespace sdfilter {
namespace {

using testing::Gen;

constexpr double kDeg = std::numbers::pi / 180.0;

Eigen::Matrix3d centered(const Eigen::Matrix3d& V) {
  return V.rowwise() - V.colwise().mean();
}

Vec3 oriented_normal(const Eigen::Matrix3d& V) {
  return (Vec3(V.row(0)) - Vec3(V.row(1))).cross(Vec3(V.row(2)) - Vec3(V.row(1)));
}

// Vertices in z = 0 whose oriented normal is +z.
Eigen::Matrix3d upward_face() {
  Eigen::Matrix3d V;
  V << 0.1, 0.2, 0, 0.3, 1.4, 0, 1.2, 0.1, 0;
  return V;
}

TEST(Projection, FeasibleFaceUnchanged) {
  const Eigen::Matrix3d V = upward_face();
  ASSERT_GT(oriented_normal(V).z(), 0.0);
  const ProjectionResult r = project_to_oriented_normal(V, Vec3::UnitZ());
  EXPECT_FALSE(r.degenerate);
  EXPECT_LT((r.positions - centered(V)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Projection, OppositeTargetCollapsesAlongDominantDirection) {
  const Eigen::Matrix3d V = upward_face();
  const ProjectionResult r = project_to_oriented_normal(V, -Vec3::UnitZ());
  EXPECT_TRUE(r.degenerate);
  // SVD oracle on the planar projection.
  const Eigen::Matrix3d P = centered(V);  // already orthogonal to z
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullV);
  const Vec3 h = svd.matrixV().col(0);
  EXPECT_LT((r.positions - P * h * h.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(r.positions.col(2).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::JacobiSVD<Eigen::Matrix3d> rank(r.positions);
  EXPECT_LT(rank.singularValues()[1], 1e-12 * rank.singularValues()[0]);
  EXPECT_LT(r.positions.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, TiltedTargetRemovesNormalComponent) {
  const Eigen::Matrix3d V = upward_face();
  const Vec3 n = Eigen::AngleAxisd(45 * kDeg, Vec3::UnitX()) * Vec3::UnitZ();
  const ProjectionResult r = project_to_oriented_normal(V, n);
  EXPECT_FALSE(r.degenerate);
  const Eigen::Matrix3d MV = centered(V);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.positions.row(k).dot(n), 0.0, 1e-12);
  EXPECT_NEAR((r.positions - MV).norm(), (MV * n).norm(), 1e-12);
}

TEST(Projection, EqualSingularValuesBreakTiesDeterministically) {
  // Equilateral triangle: the planar projection has two equal singular values.
  Eigen::Matrix3d V;
  for (int k = 0; k < 3; ++k) {
    const double a = -2.0 * std::numbers::pi * k / 3.0;
    V.row(k) << std::cos(a), std::sin(a), 0.0;
  }
  ASSERT_GT(oriented_normal(V).z(), 0.0);
  const ProjectionResult a = project_to_oriented_normal(V, -Vec3::UnitZ());
  const ProjectionResult b = project_to_oriented_normal(V, -Vec3::UnitZ());
  EXPECT_TRUE(a.degenerate);
  EXPECT_EQ(a.positions, b.positions);
  const Eigen::JacobiSVD<Eigen::Matrix3d> rank(a.positions);
  EXPECT_LT(rank.singularValues()[1], 1e-12 * rank.singularValues()[0]);
}

TEST(Projection, RandomInstancesSatisfyInvariants) {
  Gen gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix3d V;
    for (int k = 0; k < 3; ++k) V.row(k) = gen.vec3(-1, 1).transpose();
    const Vec3 n = gen.unit_vector();
    const ProjectionResult r = project_to_oriented_normal(V, n);
    EXPECT_LT(r.positions.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.positions.row(k).dot(n), 0.0, 1e-12);
    EXPECT_EQ(r.degenerate, oriented_normal(centered(V)).dot(n) < 0.0);
    if (!r.degenerate) {
      EXPECT_GE(oriented_normal(r.positions).dot(n), -1e-12);
    }
  }
}

// Brute-force search over the feasible plane: mean-centered triples
// orthogonal to n are spanned by two in-plane basis vectors per row, with
// the last row fixed by the zero mean. No sampled point may beat the
// projection.
TEST(Projection, OptimalAgainstParameterizedSearch) {
  Gen gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::Matrix3d V;
    for (int k = 0; k < 3; ++k) V.row(k) = gen.vec3(-1, 1).transpose();
    Vec3 n = gen.unit_vector();
    if (oriented_normal(centered(V)).dot(n) < 0.0) n = -n;
    const ProjectionResult r = project_to_oriented_normal(V, n);
    ASSERT_FALSE(r.degenerate);
    const Eigen::Matrix3d MV = centered(V);
    const double best = (r.positions - MV).squaredNorm();

    Vec3 e1 = n.unitOrthogonal(), e2 = n.cross(e1);
    for (int s = 0; s < 500; ++s) {
      const double scale = s < 250 ? 0.05 : 1.0;
      Eigen::Matrix3d Q;
      for (int k = 0; k < 2; ++k) {
        const Vec3 base = r.positions.row(k);
        Q.row(k) = (base + scale * (gen.normal() * e1 + gen.normal() * e2)).transpose();
      }
      Q.row(2) = -(Q.row(0) + Q.row(1));
      EXPECT_GE((Q - MV).squaredNorm(), best - 1e-12);
    }
  }
}

TEST(VertexUpdate, CurrentNormalsAsTargetsKeepVertices) {
  const TriMesh m = add_normal_noise(make_icosphere(3), 0.2, 5);
  const TriMesh out = update_vertices(m, face_normals(m));
  const double diag = m.bounding_box_diagonal();
  EXPECT_LT((out.vertices() - m.vertices()).cwiseAbs().maxCoeff(), 1e-9 * diag);
  EXPECT_TRUE(out.shares_connectivity(m));
}

TEST(VertexUpdate, SingleTriangleReachesRotatedTarget) {
  Points v(3, 3);
  for (int k = 0; k < 3; ++k) {
    const double a = -2.0 * std::numbers::pi * k / 3.0;
    v.row(k) << std::cos(a), std::sin(a), 0.0;
  }
  const TriMesh tri(v, {{0, 1, 2}});
  const Vec3 n0 = face_normals(tri).row(0);
  const Vec3 axis = n0.unitOrthogonal();
  const Vec3 target = Eigen::AngleAxisd(10 * kDeg, axis) * n0;
  Points targets(1, 3);
  targets.row(0) = target.transpose();

  const VertexUpdater updater(tri, 0.001);
  const auto result = updater.solve(tri.vertices(), targets, 20);
  const TriMesh out = tri.with_vertices(result.positions);
  const auto report = normal_consistency_report(out, targets);
  EXPECT_LT(report.deviation_degrees[0], 0.5);

  // Grid search over configurations that satisfy the normal exactly: the
  // triangle rotated onto the target about any axis through its centroid
  // and rescaled. The objective is then just w |V - V0|^2.
  const double w = 0.001;
  double grid_best = std::numeric_limits<double>::infinity();
  const Vec3 c = Points(tri.vertices()).colwise().mean();
  const Eigen::Matrix3d align = Eigen::Quaterniond::FromTwoVectors(n0, target).toRotationMatrix();
  for (int a = 0; a < 360; ++a) {
    const Eigen::Matrix3d spin = Eigen::AngleAxisd(a * kDeg, target).toRotationMatrix();
    for (int s = 0; s <= 200; ++s) {
      const double scale = 0.9 + 0.001 * s;
      double cost = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Vec3 p0 = tri.vertex(k);
        const Vec3 p = c + scale * (spin * (align * (p0 - c)));
        cost += w * (p - p0).squaredNorm();
      }
      grid_best = std::min(grid_best, cost);
    }
  }
  const auto proj = updater.project(result.positions, targets);
  const double achieved = updater.objective(result.positions, tri.vertices(), proj);
  EXPECT_LE(achieved, grid_best * (1.0 + 1e-6));
}

TEST(VertexUpdate, LargeWeightPinsVertices) {
  Gen gen(3);
  const TriMesh m = make_icosphere(2);
  Points targets = face_normals(m);
  for (int f = 0; f < targets.rows(); ++f) {
    targets.row(f) = gen.perturb(targets.row(f).transpose(), 20.0).transpose();
  }
  const TriMesh out = update_vertices(m, targets, {1e6, 20});
  EXPECT_LT((out.vertices() - m.vertices()).rowwise().norm().maxCoeff(),
            1e-4 * m.bounding_box_diagonal());
}

TEST(VertexUpdate, ParamsValidated) {
  EXPECT_THROW((VertexUpdateParams{0.0, 20}.validate()), InvalidArgument);
  EXPECT_THROW((VertexUpdateParams{0.001, 0}.validate()), InvalidArgument);
  EXPECT_NO_THROW(VertexUpdateParams{}.validate());
}

TEST(VertexUpdate, ObjectiveNonIncreasingPerHalfStep) {
  Gen gen(19);
  for (int trial = 0; trial < 4; ++trial) {
    const TriMesh m = add_normal_noise(make_icosphere(2), 0.3, trial + 1);
    Points targets = face_normals(m);
    for (int f = 0; f < targets.rows(); ++f) {
      targets.row(f) = gen.perturb(targets.row(f).transpose(), 25.0).transpose();
    }
    const VertexUpdater updater(m, gen.uniform(1e-4, 1e-1));
    const auto r = updater.solve(m.vertices(), targets, 20);
    ASSERT_EQ(r.objective_trace.size(), 40u);
    const double scale = r.objective_trace.front();
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
      EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1] + 1e-12 * scale);
    }
  }
}

TEST(VertexUpdate, TranslationInvariance) {
  Gen gen(23);
  const TriMesh m = add_normal_noise(make_icosphere(2), 0.3, 2);
  Points targets = face_normals(m);
  for (int f = 0; f < targets.rows(); ++f) {
    targets.row(f) = gen.perturb(targets.row(f).transpose(), 15.0).transpose();
  }
  const Vec3 t(3.0, -1.5, 7.25);
  const TriMesh shifted = m.with_vertices(m.vertices().rowwise() + t.transpose());
  const TriMesh a = update_vertices(m, targets);
  const TriMesh b = update_vertices(shifted, targets);
  const Points diff = (b.vertices().rowwise() - t.transpose()) - a.vertices();
  EXPECT_LT(diff.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(VertexUpdate, GlobalStepSolvesNormalEquations) {
  Gen gen(29);
  const TriMesh m = add_normal_noise(make_icosphere(3), 0.3, 4);
  Points targets = face_normals(m);
  for (int f = 0; f < targets.rows(); ++f) {
    targets.row(f) = gen.perturb(targets.row(f).transpose(), 15.0).transpose();
  }
  const VertexUpdater updater(m, 0.001);
  const auto proj = updater.project(m.vertices(), targets);
  const Points V = updater.global_step(m.vertices(), proj);
  const Points rhs = updater.system_rhs(m.vertices(), proj);
  const Eigen::MatrixXd residual = updater.system_matrix() * Eigen::MatrixXd(V) - Eigen::MatrixXd(rhs);
  EXPECT_LT(residual.norm(), 1e-8 * rhs.norm());
}

TEST(VertexUpdate, SystemMatrixIsSymmetricPositiveDefinite) {
  const TriMesh m = make_icosphere(1);
  const VertexUpdater updater(m, 0.01);
  const Eigen::MatrixXd A = updater.system_matrix();
  EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(VertexUpdate, PinnedGlobalStepMatchesDenseConstrainedSolve) {
  Gen gen(31);
  const TriMesh m = add_normal_noise(make_icosphere(1), 0.3, 6);
  Points targets = face_normals(m);
  for (int f = 0; f < targets.rows(); ++f) {
    targets.row(f) = gen.perturb(targets.row(f).transpose(), 20.0).transpose();
  }
  std::vector<char> pinned(m.num_vertices(), 0);
  for (int v = 0; v < m.num_vertices(); ++v) pinned[v] = gen.uniform(0, 1) < 0.4;
  const VertexUpdater updater(m, 0.01, pinned);
  EXPECT_EQ(updater.pinned_count(), static_cast<int>(std::count(pinned.begin(), pinned.end(), 1)));
  const auto proj = updater.project(m.vertices(), targets);
  const Points V = updater.global_step(m.vertices(), proj);

  // Oracle: minimize the full quadratic over free rows with pinned rows fixed,
  // by eliminating the pinned unknowns from the dense system.
  const Eigen::MatrixXd A = updater.system_matrix();
  const Eigen::MatrixXd b = updater.system_rhs(m.vertices(), proj);
  std::vector<int> free_rows;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!pinned[v]) free_rows.push_back(v);
  }
  const int nf = static_cast<int>(free_rows.size());
  Eigen::MatrixXd Aff(nf, nf), rhs(nf, 3);
  for (int i = 0; i < nf; ++i) {
    rhs.row(i) = b.row(free_rows[i]);
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (pinned[v]) rhs.row(i) -= A(free_rows[i], v) * m.vertices().row(v);
    }
    for (int j = 0; j < nf; ++j) Aff(i, j) = A(free_rows[i], free_rows[j]);
  }
  const Eigen::MatrixXd x = Aff.ldlt().solve(rhs);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (pinned[v]) EXPECT_EQ(Vec3(V.row(v)), m.vertex(v));
  }
  for (int i = 0; i < nf; ++i) {
    EXPECT_LT((Vec3(V.row(free_rows[i])) - Vec3(x.row(i).transpose())).norm(), 1e-10);
  }
}

TEST(VertexUpdate, PinnedSolveIsMonotoneAndKeepsPins) {
  Gen gen(37);
  const TriMesh m = add_normal_noise(make_icosphere(2), 0.3, 8);
  Points targets = face_normals(m);
  for (int f = 0; f < targets.rows(); ++f) {
    targets.row(f) = gen.perturb(targets.row(f).transpose(), 15.0).transpose();
  }
  std::vector<char> pinned(m.num_vertices(), 0);
  for (int v = 0; v < m.num_vertices(); ++v) pinned[v] = m.vertex(v).z() < 0.0;
  const VertexUpdater updater(m, 0.001, pinned);
  const auto r = updater.solve(m.vertices(), targets, 10);
  for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
    EXPECT_LE(r.objective_trace[k], r.objective_trace[k - 1] * (1 + 1e-12) + 1e-15);
  }
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (pinned[v]) EXPECT_EQ(Vec3(r.positions.row(v)), m.vertex(v));
  }
}

TEST(VertexUpdate, PinningEdgeCases) {
  const TriMesh m = make_icosphere(1);
  const VertexUpdater none(m, 0.01, std::vector<char>(m.num_vertices(), 0));
  const VertexUpdater plain(m, 0.01);
  EXPECT_EQ(none.pinned_count(), 0);
  const Points targets = face_normals(m);
  const auto proj = plain.project(m.vertices(), targets);
  EXPECT_EQ(none.global_step(m.vertices(), proj), plain.global_step(m.vertices(), proj));
  const VertexUpdater all(m, 0.01, std::vector<char>(m.num_vertices(), 1));
  EXPECT_EQ(all.solve(m.vertices(), targets, 2).positions, m.vertices());
  EXPECT_THROW(VertexUpdater(m, 0.01, std::vector<char>(3, 0)), InvalidArgument);
}

TEST(Consistency, IdenticalTargetsReportZero) {
  const TriMesh m = make_icosphere(2);
  const auto r = normal_consistency_report(m, face_normals(m));
  ASSERT_EQ(static_cast<int>(r.deviation_degrees.size()), m.num_faces());
  EXPECT_EQ(r.flips, 0);
  for (double d : r.deviation_degrees) EXPECT_NEAR(d, 0.0, 1e-6);
}

TEST(Consistency, OppositeFaceCountsAsFlip) {
  const TriMesh m = make_icosphere(1);
  Points targets = face_normals(m);
  targets.row(3) *= -1.0;
  const auto r = normal_consistency_report(m, targets);
  EXPECT_EQ(r.flips, 1);
  EXPECT_NEAR(r.deviation_degrees[3], 180.0, 1e-9);
  EXPECT_NEAR(r.mean_deviation_degrees, 180.0 / m.num_faces(), 1e-6);
}

TEST(Consistency, HistogramCountsMatchFaces) {
  Gen gen(1);
  const TriMesh m = gen.jittered_grid(7, 0.3);
  const auto r = normal_consistency_report(m, gen.unit_signal(m.num_faces()));
  std::vector<int> bins(19, 0);
  for (double d : r.deviation_degrees) {
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, 180.0);
    ++bins[static_cast<int>(d / 10.0)];
  }
  int total = 0;
  for (int b : bins) total += b;
  EXPECT_EQ(total, m.num_faces());
}

}  // namespace
}  // namespace sdfilter
