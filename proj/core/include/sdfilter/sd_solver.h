#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sdfilter/neighborhood.h"

namespace sdfilter {

/// Per-element d-dimensional signal, one value per row.
using Signal = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FilterParams {
  double lambda = 1.0;  ///< regularizer weight before rescaling
  double eta = 1.0;     ///< spatial Gaussian std (length)
  double mu = 1.0;      ///< static guidance Gaussian std
  double nu = 0.3;      ///< dynamic range Gaussian std
  int max_iters = 100;
  double eps_degrees = 0.2;
  bool unit_constrained = true;
  /// When false the solver always runs max_iters iterations.
  bool stop_on_convergence = true;

  /// Throws InvalidArgument on non-positive eta/mu/nu, negative lambda or
  /// max_iters < 1.
  void validate() const;
};

/// The domain a signal lives on: fidelity weights (face areas or unit sample
/// weights) and neighborhoods with cached spatial weights.
struct FilterDomain {
  Eigen::VectorXd areas;
  Neighborhoods neighborhoods;

  int size() const { return static_cast<int>(areas.size()); }
};

struct EnergyBreakdown {
  double fidelity = 0.0;
  double regularizer = 0.0;
  double total = 0.0;
};

/// lambda_user * sum(A_i) / sum_i sum_{j in N(i)} A_j phi_eta(|c_i - c_j|).
/// Throws InvalidArgument when the denominator is zero.
double rescale_lambda(const FilterDomain& domain, double lambda_user);

/// Per-face diagnostics of a step.
struct StepReport {
  /// Faces whose combination vector vanished in the normalized step; they
  /// keep their previous value.
  std::vector<int> vanished;
};

/// The SD filter energy for one (initial, guidance) pair over a domain.
///
/// The constructor caches lambda_eff and the static part of every pair
/// weight, phi_eta * phi_mu(|g_i - g_j|). All step functions read only their
/// argument and return a new signal; they are safe to call concurrently.
/// The domain must outlive the problem.
class SdProblem {
 public:
  SdProblem(const FilterDomain& domain, Signal initial, const Signal& guidance,
            const FilterParams& params);

  const FilterDomain& domain() const { return *domain_; }
  const FilterParams& params() const { return params_; }
  const Signal& initial() const { return initial_; }
  double lambda_eff() const { return lambda_eff_; }
  int size() const { return domain_->size(); }
  int dimension() const { return static_cast<int>(initial_.cols()); }

  /// Fidelity, regularizer and total = fidelity + lambda_eff * regularizer.
  /// In unit-constrained mode every value is normalized before evaluation.
  EnergyBreakdown energy(const Signal& current) const;

  /// One Jacobi-style fixed-point update (unconstrained).
  Signal fixed_point_step(const Signal& current) const;

  /// One fixed-point update followed by per-element normalization.
  Signal normalized_step(const Signal& current, StepReport* report = nullptr) const;

  /// One majorization-minimization step: assembles the surrogate system and
  /// solves each column with preconditioned conjugate gradients.
  /// Throws SolverError when a column misses the 1e-8 relative residual.
  Signal mm_step(const Signal& current) const;

  /// D + lambda_eff * M for the surrogate at `current`.
  SparseMatrix mm_system(const Signal& current) const;
  /// D * initial.
  Signal mm_rhs() const;

  /// Residual of the unit-constrained optimality condition per element:
  /// |(I - u u^T)(u - combination / denominator)| with u normalized.
  Eigen::VectorXd stationarity_residual(const Signal& current) const;

 private:
  /// phi_nu(|u_i - u_j|) for every neighbor slot.
  Eigen::VectorXd range_weights(const Signal& u) const;
  /// acc = A_i f_i + sum_j b_ij u_j and den = A_i + sum_j b_ij.
  void accumulate(const Signal& u, const Eigen::VectorXd& r, int i, double* acc,
                  double* den) const;

  const FilterDomain* domain_;
  Signal initial_;
  FilterParams params_;
  double lambda_eff_ = 0.0;
  double inv_two_nu_sq_ = 0.0;
  std::vector<double> static_weights_;  // aligned with domain_->neighborhoods.indices
  std::vector<int> mirror_;             // slot of (j, i) for the slot of (i, j)
  std::vector<double> pair_coeff_;      // lambda_eff (A_i + A_j) / (2 nu^2) * static weight
  std::vector<int> upper_start_;        // first slot of row i with j > i
};

/// Rows of `signal` scaled to unit length; zero rows stay zero.
Signal normalize_rows(const Signal& signal);

/// True iff sum A_i |next_i - prev_i|^2 <= 4 sin^2(eps/2) sum A_i (eps in
/// degrees), with a 1e-12 relative allowance for rounding on the right side.
bool has_converged(const Signal& prev, const Signal& next, const Eigen::VectorXd& areas,
                   double eps_degrees);

enum class SolverKind { FixedPoint, MajorizationMinimization };

struct FilterOptions {
  SolverKind solver = SolverKind::FixedPoint;
  bool record_energy = true;
};

struct FilterResult {
  Signal signal;
  int iterations = 0;
  bool converged = false;
  /// Energy of the starting state followed by one entry per iteration.
  std::vector<EnergyBreakdown> trace;
  /// Total count of vanished combinations over all normalized steps.
  int vanished_combinations = 0;
};

/// Runs the solver selected by `options` (the normalized fixed-point step
/// when params.unit_constrained) until convergence or params.max_iters.
FilterResult filter_signal(const FilterDomain& domain, const Signal& initial,
                           const Signal& guidance, const FilterParams& params,
                           const FilterOptions& options = {});

}  // namespace sdfilter
