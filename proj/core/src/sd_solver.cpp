#include "sdfilter/sd_solver.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sdfilter/errors.h"
#include "sdfilter/kernels.h"
#include "sdfilter/sparse_cg.h"

namespace sdfilter {

namespace {

double row_distance_sq(const Signal& a, int i, const Signal& b, int j) {
  const Eigen::Index d = a.cols();
  const double* x = a.data() + i * d;
  const double* y = b.data() + j * d;
  if (d == 3) {
    const double t0 = x[0] - y[0], t1 = x[1] - y[1], t2 = x[2] - y[2];
    return t0 * t0 + t1 * t1 + t2 * t2;
  }
  double s = 0.0;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double t = x[c] - y[c];
    s += t * t;
  }
  return s;
}

void check_shape(const Signal& s, int n, Eigen::Index d, const char* what) {
  if (s.rows() != n || s.cols() != d) {
    throw InvalidArgument(std::string(what) + " has shape " + std::to_string(s.rows()) + "x" +
                          std::to_string(s.cols()) + ", expected " + std::to_string(n) + "x" +
                          std::to_string(d));
  }
}

}  // namespace

void FilterParams::validate() const {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (!(mu > 0.0)) throw InvalidArgument("mu must be positive");
  if (!(nu > 0.0)) throw InvalidArgument("nu must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  if (max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
  if (!(eps_degrees >= 0.0)) throw InvalidArgument("eps must be non-negative");
}

double rescale_lambda(const FilterDomain& domain, double lambda_user) {
  const auto& nb = domain.neighborhoods;
  double total_area = 0.0;
  double weighted = 0.0;
  for (int i = 0; i < domain.size(); ++i) {
    total_area += domain.areas[i];
    const auto js = nb.neighbors(i);
    const auto ws = nb.weights(i);
    for (std::size_t k = 0; k < js.size(); ++k) weighted += domain.areas[js[k]] * ws[k];
  }
  if (!(weighted > 0.0)) {
    throw InvalidArgument("cannot rescale lambda: every neighborhood is empty");
  }
  return lambda_user * total_area / weighted;
}

Signal normalize_rows(const Signal& signal) {
  Signal out = signal;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double len = out.row(i).norm();
    if (len > 0.0) out.row(i) /= len;
  }
  return out;
}

SdProblem::SdProblem(const FilterDomain& domain, Signal initial, const Signal& guidance,
                     const FilterParams& params)
    : domain_(&domain), initial_(std::move(initial)), params_(params) {
  params_.validate();
  const int n = domain.size();
  if (domain.neighborhoods.size() != n) {
    throw InvalidArgument("neighborhood table does not match the domain size");
  }
  check_shape(initial_, n, initial_.cols(), "initial signal");
  check_shape(guidance, n, guidance.cols(), "guidance signal");

  lambda_eff_ = params_.lambda > 0.0 ? rescale_lambda(domain, params_.lambda) : 0.0;
  inv_two_nu_sq_ = 1.0 / (2.0 * params_.nu * params_.nu);

  const auto& nb = domain.neighborhoods;
  static_weights_.resize(nb.total_pairs());
  mirror_.resize(nb.total_pairs());
  pair_coeff_.resize(nb.total_pairs());
  upper_start_.resize(n);
  int asymmetric = 0;
#pragma omp parallel for schedule(static) reduction(+ : asymmetric)
  for (int i = 0; i < n; ++i) {
    for (int k = nb.offsets[i]; k < nb.offsets[i + 1]; ++k) {
      const int j = nb.indices[k];
      static_weights_[k] =
          nb.spatial_weights[k] * kernel_phi_sq(row_distance_sq(guidance, i, guidance, j), params_.mu);
      const auto row = nb.neighbors(j);
      const auto it = std::lower_bound(row.begin(), row.end(), i);
      if (it == row.end() || *it != i) {
        ++asymmetric;
        continue;
      }
      mirror_[k] = nb.offsets[j] + static_cast<int>(it - row.begin());
      pair_coeff_[k] = lambda_eff_ * inv_two_nu_sq_ * (domain.areas[i] + domain.areas[j]) *
                       static_weights_[k];
    }
    const auto row = nb.neighbors(i);
    upper_start_[i] =
        nb.offsets[i] + static_cast<int>(std::upper_bound(row.begin(), row.end(), i) - row.begin());
  }
  if (asymmetric > 0) throw InvalidArgument("neighborhoods must be symmetric");
}

Eigen::VectorXd SdProblem::range_weights(const Signal& u) const {
  const int n = size();
  const auto& nb = domain_->neighborhoods;
  Eigen::VectorXd r(static_cast<Eigen::Index>(nb.total_pairs()));
  const double scale = -inv_two_nu_sq_;
  // Each unordered pair is evaluated once, by its lower index, and written to
  // both of its slots.
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    for (int k = upper_start_[i]; k < nb.offsets[i + 1]; ++k) {
      const int j = nb.indices[k];
      const double w = std::exp(scale * row_distance_sq(u, i, u, j));
      r[k] = w;
      r[mirror_[k]] = w;
    }
  }
  return r;
}

EnergyBreakdown SdProblem::energy(const Signal& current) const {
  const int n = size();
  check_shape(current, n, dimension(), "current signal");
  const Signal u = params_.unit_constrained ? normalize_rows(current) : current;
  const auto& nb = domain_->neighborhoods;
  const auto& A = domain_->areas;
  const Eigen::VectorXd r = range_weights(u);

  Eigen::VectorXd fid(n), reg(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    fid[i] = A[i] * row_distance_sq(u, i, initial_, i);
    double acc = 0.0;
    for (int k = nb.offsets[i]; k < nb.offsets[i + 1]; ++k) {
      acc += A[nb.indices[k]] * static_weights_[k] * (1.0 - r[k]);
    }
    reg[i] = acc;
  }
  EnergyBreakdown e;
  for (int i = 0; i < n; ++i) {
    e.fidelity += fid[i];
    e.regularizer += reg[i];
  }
  e.total = e.fidelity + lambda_eff_ * e.regularizer;
  return e;
}

void SdProblem::accumulate(const Signal& u, const Eigen::VectorXd& r, int i, double* acc,
                           double* den) const {
  const auto& nb = domain_->neighborhoods;
  const double a_i = domain_->areas[i];
  const Eigen::Index d = dimension();
  const double* init = initial_.data() + i * d;
  const int begin = nb.offsets[i];
  const int end = nb.offsets[i + 1];
  double total = a_i;
  if (d == 3) {
    double x = a_i * init[0], y = a_i * init[1], z = a_i * init[2];
    for (int k = begin; k < end; ++k) {
      const double b = pair_coeff_[k] * r[k];
      const double* uj = u.data() + 3 * static_cast<Eigen::Index>(nb.indices[k]);
      x += b * uj[0];
      y += b * uj[1];
      z += b * uj[2];
      total += b;
    }
    acc[0] = x;
    acc[1] = y;
    acc[2] = z;
  } else {
    for (Eigen::Index c = 0; c < d; ++c) acc[c] = a_i * init[c];
    for (int k = begin; k < end; ++k) {
      const double b = pair_coeff_[k] * r[k];
      const double* uj = u.data() + d * nb.indices[k];
      for (Eigen::Index c = 0; c < d; ++c) acc[c] += b * uj[c];
      total += b;
    }
  }
  *den = total;
}

Signal SdProblem::fixed_point_step(const Signal& current) const {
  const int n = size();
  check_shape(current, n, dimension(), "current signal");
  if (lambda_eff_ == 0.0) return initial_;
  const Eigen::Index d = dimension();
  const Eigen::VectorXd r = range_weights(current);
  Signal out(n, d);

#pragma omp parallel
  {
    std::vector<double> acc(d);
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < n; ++i) {
      double den = 0.0;
      accumulate(current, r, i, acc.data(), &den);
      for (Eigen::Index c = 0; c < d; ++c) out(i, c) = den > 0.0 ? acc[c] / den : current(i, c);
    }
  }
  return out;
}

Signal SdProblem::normalized_step(const Signal& current, StepReport* report) const {
  const int n = size();
  check_shape(current, n, dimension(), "current signal");
  const Signal u = normalize_rows(current);
  if (lambda_eff_ == 0.0) return normalize_rows(initial_);
  const Eigen::Index d = dimension();
  const Eigen::VectorXd r = range_weights(u);
  Signal out(n, d);
  std::vector<char> vanished(n, 0);

#pragma omp parallel
  {
    std::vector<double> acc(d);
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < n; ++i) {
      double den = 0.0;
      accumulate(u, r, i, acc.data(), &den);
      double len_sq = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) len_sq += acc[c] * acc[c];
      const double len = std::sqrt(len_sq);
      if (len < 1e-14) {
        out.row(i) = u.row(i);
        vanished[i] = 1;
      } else {
        for (Eigen::Index c = 0; c < d; ++c) out(i, c) = acc[c] / len;
      }
    }
  }
  if (report != nullptr) {
    report->vanished.clear();
    for (int i = 0; i < n; ++i) {
      if (vanished[i]) report->vanished.push_back(i);
    }
  }
  return out;
}

SparseMatrix SdProblem::mm_system(const Signal& current) const {
  const int n = size();
  check_shape(current, n, dimension(), "current signal");
  const auto& nb = domain_->neighborhoods;
  const auto& A = domain_->areas;
  const Eigen::VectorXd r = range_weights(current);

  // Row i holds the diagonal plus one entry per neighbor. With symmetric
  // neighborhoods and symmetric static weights, w_ji is evaluated from the
  // (i, j) slot directly.
  std::vector<int> outer(n + 1, 0);
  for (int i = 0; i < n; ++i) outer[i + 1] = outer[i] + 1 + (nb.offsets[i + 1] - nb.offsets[i]);
  std::vector<int> inner(outer.back());
  std::vector<double> values(outer.back());

#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    int slot = outer[i];
    int diag_slot = -1;
    double diag = 0.0;
    for (int k = nb.offsets[i]; k < nb.offsets[i + 1]; ++k) {
      const int j = nb.indices[k];
      if (diag_slot < 0 && j > i) {
        diag_slot = slot++;
      }
      const double common = inv_two_nu_sq_ * static_weights_[k] * r[k];
      const double w_ij = A[j] * common;
      const double w_ji = A[i] * common;
      inner[slot] = j;
      values[slot] = -lambda_eff_ * (w_ij + w_ji);
      diag += w_ij + w_ji;
      ++slot;
    }
    if (diag_slot < 0) diag_slot = slot;
    inner[diag_slot] = i;
    values[diag_slot] = A[i] + lambda_eff_ * diag;
  }

  return Eigen::Map<const SparseMatrix>(n, n, outer.back(), outer.data(), inner.data(),
                                        values.data());
}

Signal SdProblem::mm_rhs() const { return domain_->areas.asDiagonal() * initial_; }

Signal SdProblem::mm_step(const Signal& current) const {
  const SparseMatrix S = mm_system(current);
  const Signal rhs = mm_rhs();
  const int n = size();
  Signal out(n, dimension());
  CgOptions opts;
  opts.relative_tolerance = 1e-8;
  opts.max_iterations = std::max(10 * n, 10);
  for (Eigen::Index c = 0; c < dimension(); ++c) {
    Eigen::VectorXd x = current.col(c);
    const Eigen::VectorXd b = rhs.col(c);
    const CgResult res = conjugate_gradient(S, b, x, opts);
    if (!res.converged) {
      throw SolverError("conjugate gradient did not converge for column " + std::to_string(c),
                        res.relative_residual);
    }
    out.col(c) = x;
  }
  return out;
}

Eigen::VectorXd SdProblem::stationarity_residual(const Signal& current) const {
  const int n = size();
  check_shape(current, n, dimension(), "current signal");
  const Signal u = normalize_rows(current);
  const Eigen::Index d = dimension();
  const Eigen::VectorXd r = range_weights(u);
  Eigen::VectorXd res(n);
#pragma omp parallel
  {
    std::vector<double> acc(d);
#pragma omp for schedule(dynamic, 64)
    for (int i = 0; i < n; ++i) {
      double den = 0.0;
      accumulate(u, r, i, acc.data(), &den);
      if (!(den > 0.0)) {
        res[i] = 0.0;
        continue;
      }
      Eigen::RowVectorXd diff(d);
      for (Eigen::Index c = 0; c < d; ++c) diff[c] = u(i, c) - acc[c] / den;
      const Eigen::RowVectorXd tangent = diff - diff.dot(u.row(i)) * u.row(i);
      res[i] = tangent.norm();
    }
  }
  return res;
}

bool has_converged(const Signal& prev, const Signal& next, const Eigen::VectorXd& areas,
                   double eps_degrees) {
  double change = 0.0;
  double total_area = 0.0;
  for (Eigen::Index i = 0; i < prev.rows(); ++i) {
    change += areas[i] * (next.row(i) - prev.row(i)).squaredNorm();
    total_area += areas[i];
  }
  const double half = 0.5 * eps_degrees * std::numbers::pi / 180.0;
  const double s = std::sin(half);
  return change <= 4.0 * s * s * total_area * (1.0 + 1e-12);
}

FilterResult filter_signal(const FilterDomain& domain, const Signal& initial,
                           const Signal& guidance, const FilterParams& params,
                           const FilterOptions& options) {
  if (params.unit_constrained && options.solver == SolverKind::MajorizationMinimization) {
    throw InvalidArgument("the MM solver cannot enforce unit-length constraints");
  }
  const SdProblem problem(domain, initial, guidance, params);
  FilterResult result;
  Signal current = params.unit_constrained ? normalize_rows(initial) : initial;
  if (options.record_energy) result.trace.push_back(problem.energy(current));

  StepReport report;
  for (int k = 1; k <= params.max_iters; ++k) {
    Signal next;
    if (params.unit_constrained) {
      next = problem.normalized_step(current, &report);
      result.vanished_combinations += static_cast<int>(report.vanished.size());
    } else if (options.solver == SolverKind::FixedPoint) {
      next = problem.fixed_point_step(current);
    } else {
      next = problem.mm_step(current);
    }
    if (options.record_energy) result.trace.push_back(problem.energy(next));
    const bool done = params.stop_on_convergence &&
                      has_converged(current, next, domain.areas, params.eps_degrees);
    current = std::move(next);
    result.iterations = k;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.signal = std::move(current);
  return result;
}

}  // namespace sdfilter
