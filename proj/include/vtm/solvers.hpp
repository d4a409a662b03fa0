#pragma once

/// Linear solvers behind a single options struct: sparse direct factorization
/// (delegated to Eigen), conjugate gradients and restarted GMRES with
/// Jacobi or caller-supplied preconditioning.

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>

#include "vtm/sparse.hpp"

namespace vtm {

enum class SolverMethod { direct, cg, gmres };

struct SolverOptions {
  SolverMethod method = SolverMethod::direct;
  double rtol = 1e-12;
  int max_iter = 2000;
  bool symmetric = false; // direct: use LDLT instead of LU
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = true;
};

using Preconditioner = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Reusable direct factorization (LDLT for symmetric, LU otherwise).
class DirectFactorization {
 public:
  DirectFactorization(const SparseMatrix& A, bool symmetric)
      : symmetric_(symmetric) {
    Eigen::SparseMatrix<double> m = A.to_eigen();
    if (symmetric_) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
      ldlt_->compute(m);
      require(ldlt_->info() == Eigen::Success, "direct: LDLT factorization failed");
    } else {
      lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      lu_->compute(m);
      require(lu_->info() == Eigen::Success, "direct: LU factorization failed");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    if (symmetric_) return ldlt_->solve(b);
    return lu_->solve(b);
  }

 private:
  bool symmetric_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

inline Eigen::VectorXd jacobi_inverse_diagonal(const SparseMatrix& A) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(A.nrows);
  for (index_t i = 0; i < A.nrows; ++i)
    for (index_t k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
      if (A.col_idx[k] == i && A.values[k] != 0.0) d[i] = 1.0 / A.values[k];
  return d;
}

inline Eigen::VectorXd solve_cg(const SparseMatrix& A, const Eigen::VectorXd& b,
                                const SolverOptions& opts, SolveReport* report,
                                const Preconditioner& prec = nullptr) {
  Eigen::VectorXd diag = prec ? Eigen::VectorXd() : jacobi_inverse_diagonal(A);
  auto apply_prec = [&](const Eigen::VectorXd& r) {
    return prec ? prec(r) : Eigen::VectorXd(diag.cwiseProduct(r));
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.ncols);
  Eigen::VectorXd r = b;
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (report) *report = {0, 0.0, true};
    return x;
  }
  Eigen::VectorXd z = apply_prec(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (r.norm() <= opts.rtol * bnorm) break;
    Eigen::VectorXd Ap = A * p;
    double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = apply_prec(r);
    double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (report) *report = {it, r.norm() / bnorm, r.norm() <= opts.rtol * bnorm};
  return x;
}

/// Restarted GMRES(m) with left preconditioning.
inline Eigen::VectorXd solve_gmres(const SparseMatrix& A,
                                   const Eigen::VectorXd& b,
                                   const SolverOptions& opts,
                                   SolveReport* report,
                                   const Preconditioner& prec = nullptr,
                                   const Eigen::VectorXd* x0 = nullptr) {
  const int restart = 50;
  Eigen::VectorXd diag = prec ? Eigen::VectorXd() : jacobi_inverse_diagonal(A);
  auto apply_prec = [&](const Eigen::VectorXd& r) {
    return prec ? prec(r) : Eigen::VectorXd(diag.cwiseProduct(r));
  };

  Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(A.ncols);
  double bnorm = b.norm();
  if (bnorm == 0.0) {
    if (report) *report = {0, 0.0, true};
    return Eigen::VectorXd::Zero(A.ncols);
  }
  int total_it = 0;
  double rel = 0.0;
  for (int cycle = 0; total_it < opts.max_iter; ++cycle) {
    Eigen::VectorXd r = b - A * x;
    rel = r.norm() / bnorm;
    if (rel <= opts.rtol) break;
    Eigen::VectorXd z = apply_prec(r);
    double beta = z.norm();
    int m = std::min(restart, opts.max_iter - total_it);
    Eigen::MatrixXd V(A.ncols, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m), sn(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    V.col(0) = z / beta;
    g[0] = beta;
    int k = 0;
    for (; k < m; ++k) {
      ++total_it;
      Eigen::VectorXd w = apply_prec(A * V.col(k));
      for (int j = 0; j <= k; ++j) {
        H(j, k) = w.dot(V.col(j));
        w -= H(j, k) * V.col(j);
      }
      double h_sub = w.norm();
      H(k + 1, k) = h_sub;
      if (h_sub > 0) V.col(k + 1) = w / h_sub;
      // Givens rotations keep an upper-triangular H
      for (int j = 0; j < k; ++j) {
        double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
        H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
        H(j, k) = t;
      }
      double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= opts.rtol * beta * 0.1 || h_sub == 0.0) {
        ++k;
        break;
      }
    }
    Eigen::VectorXd y = H.topLeftCorner(k, k)
                            .triangularView<Eigen::Upper>()
                            .solve(g.head(k));
    x += V.leftCols(k) * y;
    if (total_it >= opts.max_iter) break;
  }
  Eigen::VectorXd r = b - A * x;
  rel = r.norm() / bnorm;
  if (report) *report = {total_it, rel, rel <= opts.rtol};
  return x;
}

inline Eigen::VectorXd solve(const SparseMatrix& A, const Eigen::VectorXd& b,
                             const SolverOptions& opts = {},
                             SolveReport* report = nullptr) {
  require(A.nrows == A.ncols, "solve: matrix must be square");
  switch (opts.method) {
    case SolverMethod::direct: {
      DirectFactorization fac(A, opts.symmetric);
      Eigen::VectorXd x = fac.solve(b);
      if (report) {
        double bn = b.norm();
        double rel = bn == 0.0 ? 0.0 : (b - A * x).norm() / bn;
        *report = {1, rel, true};
      }
      return x;
    }
    case SolverMethod::cg: return solve_cg(A, b, opts, report);
    default: return solve_gmres(A, b, opts, report);
  }
}

} // namespace vtm
