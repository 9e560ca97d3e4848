#include "sdfilter/sparse_cg.h"

#include <cmath>

namespace sdfilter {

namespace {

void multiply(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A, const Eigen::VectorXd& x,
              Eigen::VectorXd& y) {
  const int n = static_cast<int>(A.rows());
  const int* outer = A.outerIndexPtr();
  const int* inner = A.innerIndexPtr();
  const double* val = A.valuePtr();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = outer[i]; k < outer[i + 1]; ++k) s += val[k] * x[inner[k]];
    y[i] = s;
  }
}

}  // namespace

CgResult conjugate_gradient(const Eigen::SparseMatrix<double, Eigen::RowMajor>& A,
                            const Eigen::VectorXd& b, Eigen::VectorXd& x,
                            const CgOptions& options) {
  CgResult result;
  const Eigen::Index n = b.size();
  if (x.size() != n) x = Eigen::VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    x.setZero();
    result.converged = true;
    return result;
  }

  Eigen::VectorXd inv_diag(n);
  const Eigen::VectorXd diag = A.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) inv_diag[i] = diag[i] != 0.0 ? 1.0 / diag[i] : 1.0;

  Eigen::VectorXd Ap(n);
  multiply(A, x, Ap);
  Eigen::VectorXd r = b - Ap;
  double r_norm = r.norm();
  result.relative_residual = r_norm / b_norm;
  if (r_norm <= options.relative_tolerance * b_norm) {
    result.converged = true;
    return result;
  }
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);

  for (int it = 1; it <= options.max_iterations; ++it) {
    multiply(A, p, Ap);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    r_norm = r.norm();
    result.iterations = it;
    result.relative_residual = r_norm / b_norm;
    if (r_norm <= options.relative_tolerance * b_norm) {
      result.converged = true;
      return result;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return result;
}

}  // namespace sdfilter
