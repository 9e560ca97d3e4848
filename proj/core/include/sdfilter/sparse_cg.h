#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace sdfilter {

struct CgOptions {
  double relative_tolerance = 1e-8;
  int max_iterations = 1000;
};

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite row-major matrix. `x` holds the initial guess on entry and the
/// solution on exit. Stops once |b - A x| <= tol * |b|.
CgResult conjugate_gradient(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                            const Eigen::VectorXd& b, Eigen::VectorXd& x,
                            const CgOptions& options = {});

}  // namespace sdfilter
