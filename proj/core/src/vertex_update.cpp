#include "sdfilter/vertex_update.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "sdfilter/errors.h"

namespace sdfilter {

namespace {

const Eigen::Matrix3d& centering_matrix() {
  static const Eigen::Matrix3d M = [] {
    Eigen::Matrix3d m;
    m << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    return Eigen::Matrix3d(m / 3.0);
  }();
  return M;
}

Eigen::Matrix3d gather(const Points& V, const Face& f) {
  Eigen::Matrix3d out;
  for (int k = 0; k < 3; ++k) out.row(k) = V.row(f[k]);
  return out;
}

bool lexicographically_larger_abs(const Vec3& a, const Vec3& b) {
  for (int k = 0; k < 3; ++k) {
    const double x = std::abs(a[k]);
    const double y = std::abs(b[k]);
    if (x != y) return x > y;
  }
  return false;
}

}  // namespace

void VertexUpdateParams::validate() const {
  if (!(closeness_weight > 0.0)) throw InvalidArgument("closeness weight must be positive");
  if (iterations < 1) throw InvalidArgument("vertex update needs at least one iteration");
}

ProjectionResult project_to_oriented_normal(const Eigen::Matrix3d& face_positions,
                                            const Vec3& target_normal) {
  const Eigen::Matrix3d centered = centering_matrix() * face_positions;
  const Eigen::Matrix3d plane = Eigen::Matrix3d::Identity() - target_normal * target_normal.transpose();
  const Eigen::Matrix3d projected = centered * plane;

  const Vec3 v1 = centered.row(0).transpose();
  const Vec3 v2 = centered.row(1).transpose();
  const Vec3 v3 = centered.row(2).transpose();
  const Vec3 current = (v1 - v2).cross(v3 - v2);

  ProjectionResult out;
  if (current.dot(target_normal) >= 0.0) {
    out.positions = projected;
    return out;
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(projected, Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  Vec3 h = svd.matrixV().col(0);
  if (sigma[0] - sigma[1] <= 1e-12 * sigma[0]) {
    const Vec3 alt = svd.matrixV().col(1);
    if (lexicographically_larger_abs(alt, h)) h = alt;
  }
  out.positions = projected * (h * h.transpose());
  out.degenerate = true;
  return out;
}

struct VertexUpdater::Factorization {
  Eigen::SparseMatrix<double> matrix;
  // Reduced system over free vertices; empty `free` means nothing is pinned.
  std::vector<int> free;
  std::vector<int> fixed;
  Eigen::SparseMatrix<double> coupling;  // free x fixed block
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

VertexUpdater::VertexUpdater(const TriMesh& mesh, double closeness_weight, std::vector<char> pinned)
    : mesh_(mesh), weight_(closeness_weight), factor_(std::make_unique<Factorization>()) {
  if (!(closeness_weight > 0.0)) throw InvalidArgument("closeness weight must be positive");
  const int nv = mesh.num_vertices();
  if (!pinned.empty() && static_cast<int>(pinned.size()) != nv) {
    throw InvalidArgument("pinned flags do not match the mesh");
  }
  const Eigen::Matrix3d& M = centering_matrix();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_faces()) * 9 + nv);
  for (int v = 0; v < nv; ++v) triplets.emplace_back(v, v, closeness_weight);
  // K^T K accumulates M^T M = M for every face.
  for (const Face& f : mesh.faces()) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) triplets.emplace_back(f[a], f[b], M(a, b));
    }
  }
  factor_->matrix.resize(nv, nv);
  factor_->matrix.setFromTriplets(triplets.begin(), triplets.end());
  if (std::find(pinned.begin(), pinned.end(), 1) == pinned.end()) {
    factor_->ldlt.compute(factor_->matrix);
  } else {
    std::vector<int> slot(nv);
    for (int v = 0; v < nv; ++v) {
      auto& list = pinned[v] ? factor_->fixed : factor_->free;
      slot[v] = static_cast<int>(list.size());
      list.push_back(v);
    }
    std::vector<Eigen::Triplet<double>> ff, fp;
    for (int col = 0; col < factor_->matrix.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(factor_->matrix, col); it; ++it) {
        const int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
        if (pinned[r]) continue;
        (pinned[c] ? fp : ff).emplace_back(slot[r], slot[c], it.value());
      }
    }
    const auto nfree = static_cast<Eigen::Index>(factor_->free.size());
    Eigen::SparseMatrix<double> reduced(nfree, nfree);
    reduced.setFromTriplets(ff.begin(), ff.end());
    factor_->coupling.resize(nfree, static_cast<Eigen::Index>(factor_->fixed.size()));
    factor_->coupling.setFromTriplets(fp.begin(), fp.end());
    if (nfree > 0) factor_->ldlt.compute(reduced);
  }
  const bool solved = factor_->fixed.empty() || !factor_->free.empty();
  if (solved && factor_->ldlt.info() != Eigen::Success) {
    throw SolverError("factorization of the vertex update system failed", 0.0);
  }
}

VertexUpdater::~VertexUpdater() = default;
VertexUpdater::VertexUpdater(VertexUpdater&&) noexcept = default;
VertexUpdater& VertexUpdater::operator=(VertexUpdater&&) noexcept = default;

const Eigen::SparseMatrix<double>& VertexUpdater::system_matrix() const { return factor_->matrix; }

int VertexUpdater::pinned_count() const { return static_cast<int>(factor_->fixed.size()); }

std::vector<Eigen::Matrix3d> VertexUpdater::project(const Points& positions,
                                                    const Points& target_normals,
                                                    int* degenerate_count) const {
  const int nf = mesh_.num_faces();
  if (target_normals.rows() != nf) throw InvalidArgument("one target normal per face is required");
  std::vector<Eigen::Matrix3d> P(nf);
  std::vector<char> degenerate(nf, 0);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < nf; ++f) {
    const ProjectionResult r = project_to_oriented_normal(gather(positions, mesh_.face(f)),
                                                          target_normals.row(f).transpose());
    P[f] = r.positions;
    degenerate[f] = r.degenerate ? 1 : 0;
  }
  if (degenerate_count != nullptr) {
    *degenerate_count = static_cast<int>(std::count(degenerate.begin(), degenerate.end(), 1));
  }
  return P;
}

Points VertexUpdater::system_rhs(const Points& reference,
                                 const std::vector<Eigen::Matrix3d>& projections) const {
  Points rhs = weight_ * reference;
  const Eigen::Matrix3d& M = centering_matrix();
  for (int f = 0; f < mesh_.num_faces(); ++f) {
    const Face& t = mesh_.face(f);
    const Eigen::Matrix3d contrib = M.transpose() * projections[f];
    for (int k = 0; k < 3; ++k) rhs.row(t[k]) += contrib.row(k);
  }
  return rhs;
}

Points VertexUpdater::global_step(const Points& reference,
                                  const std::vector<Eigen::Matrix3d>& projections) const {
  const Points rhs = system_rhs(reference, projections);
  const Factorization& F = *factor_;
  Points V(rhs.rows(), 3);
  if (F.fixed.empty()) {
    for (int c = 0; c < 3; ++c) {
      const Eigen::VectorXd b = rhs.col(c);
      V.col(c) = F.ldlt.solve(b);
    }
  } else {
    const auto nfree = static_cast<Eigen::Index>(F.free.size());
    const auto nfixed = static_cast<Eigen::Index>(F.fixed.size());
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd b(nfree), xp(nfixed);
      for (Eigen::Index i = 0; i < nfixed; ++i) xp[i] = reference(F.fixed[i], c);
      for (Eigen::Index i = 0; i < nfree; ++i) b[i] = rhs(F.free[i], c);
      if (nfree > 0) b -= F.coupling * xp;
      const Eigen::VectorXd xf = nfree > 0 ? Eigen::VectorXd(F.ldlt.solve(b)) : Eigen::VectorXd();
      for (Eigen::Index i = 0; i < nfixed; ++i) V(F.fixed[i], c) = xp[i];
      for (Eigen::Index i = 0; i < nfree; ++i) V(F.free[i], c) = xf[i];
    }
  }
  if (!F.free.empty() && F.ldlt.info() != Eigen::Success) {
    throw SolverError("vertex update back-substitution failed", 0.0);
  }
  return V;
}

double VertexUpdater::objective(const Points& positions, const Points& reference,
                                const std::vector<Eigen::Matrix3d>& projections) const {
  double value = weight_ * (positions - reference).squaredNorm();
  const Eigen::Matrix3d& M = centering_matrix();
  for (int f = 0; f < mesh_.num_faces(); ++f) {
    value += (M * gather(positions, mesh_.face(f)) - projections[f]).squaredNorm();
  }
  return value;
}

VertexUpdater::Result VertexUpdater::solve(const Points& reference, const Points& target_normals,
                                           int iterations) const {
  if (reference.rows() != mesh_.num_vertices()) {
    throw InvalidArgument("reference positions do not match the mesh");
  }
  if (iterations < 1) throw InvalidArgument("vertex update needs at least one iteration");
  Result result;
  Points V = reference;
  for (int it = 0; it < iterations; ++it) {
    const auto P = project(V, target_normals, &result.degenerate_projections);
    result.objective_trace.push_back(objective(V, reference, P));
    V = global_step(reference, P);
    result.objective_trace.push_back(objective(V, reference, P));
  }
  result.positions = std::move(V);
  return result;
}

TriMesh update_vertices(const TriMesh& mesh, const Points& target_normals,
                        const VertexUpdateParams& params) {
  params.validate();
  const VertexUpdater updater(mesh, params.closeness_weight);
  auto r = updater.solve(mesh.vertices(), target_normals, params.iterations);
  return mesh.with_vertices(std::move(r.positions));
}

ConsistencyReport normal_consistency_report(const TriMesh& mesh, const Points& target_normals) {
  if (target_normals.rows() != mesh.num_faces()) {
    throw InvalidArgument("one target normal per face is required");
  }
  const Points achieved = face_normals(mesh);
  ConsistencyReport report;
  report.deviation_degrees.resize(mesh.num_faces());
  double sum = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec3 a = achieved.row(f).transpose();
    const Vec3 b = target_normals.row(f).transpose();
    const double dot = a.dot(b);
    const double deg = std::atan2(a.cross(b).norm(), dot) * 180.0 / std::numbers::pi;
    report.deviation_degrees[f] = deg;
    sum += deg;
    if (dot < 0.0) ++report.flips;
  }
  if (mesh.num_faces() > 0) report.mean_deviation_degrees = sum / mesh.num_faces();
  return report;
}

}  // namespace sdfilter
