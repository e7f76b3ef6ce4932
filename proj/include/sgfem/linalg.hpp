#pragma once

// Sparse symmetric matrices and the solvers used by the spatial, block-system
// and time-stepping code.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "sgfem/errors.hpp"

namespace sgfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Symmetric sparse matrix built from upper-triangle contributions only, so
/// that A(i,j) and A(j,i) are the same stored sum bit for bit.
class SymSparseMatrix {
 public:
  SymSparseMatrix() = default;

  /// Entries with row > col are rejected; duplicates are summed in the order given.
  SymSparseMatrix(Eigen::Index n, const std::vector<Triplet>& upper) {
    for (const auto& t : upper)
      if (t.row() > t.col()) throw std::invalid_argument("SymSparseMatrix: expected upper-triangle triplets");
    SparseMatrix U(n, n);
    U.setFromTriplets(upper.begin(), upper.end());
    SparseMatrix L = SparseMatrix(U.triangularView<Eigen::StrictlyUpper>().transpose());
    mat_ = U + L;
    mat_.makeCompressed();
  }

  /// Symmetrizes by taking the upper triangle of a (not necessarily symmetric) matrix.
  static SymSparseMatrix from_upper(const SparseMatrix& a) {
    std::vector<Triplet> t;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it)
        if (it.row() <= it.col()) t.emplace_back(it.row(), it.col(), it.value());
    return SymSparseMatrix(a.rows(), t);
  }

  Eigen::Index rows() const { return mat_.rows(); }
  const SparseMatrix& matrix() const { return mat_; }
  double coeff(Eigen::Index i, Eigen::Index j) const { return mat_.coeff(i, j); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }

  /// "row col value" per nonzero, 0-based, sorted by (row, col).
  std::string to_coo_text() const {
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> e;
    for (Eigen::Index k = 0; k < mat_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(mat_, k); it; ++it) e.emplace_back(it.row(), it.col(), it.value());
    std::sort(e.begin(), e.end());
    std::ostringstream os;
    char buf[64];
    for (const auto& [r, c, v] : e) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << r << ' ' << c << ' ' << buf << '\n';
    }
    return os.str();
  }

 private:
  SparseMatrix mat_;
};

inline constexpr Eigen::Index kDirectSolverLimit = 50000;
inline constexpr double kSolveTolerance = 1e-11;

/// Solves A x = b for symmetric positive definite A. Sparse LDLT up to 50k
/// unknowns, Jacobi-preconditioned CG (tol 1e-11, at most 10 n iterations)
/// beyond. The normwise backward error |b - Ax| / (|A| |x| + |b|) (infinity
/// norms) is checked after up to two refinement steps.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(SparseMatrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("SymmetricSolver: matrix not square");
    norm_a_ = 0.0;
    for (Eigen::Index k = 0; k < a_.outerSize(); ++k) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(a_, k); it; ++it) s += std::abs(it.value());
      norm_a_ = std::max(norm_a_, s);  // column sums; equals the row-sum norm for symmetric A
    }
    if (a_.rows() <= kDirectSolverLimit) {
      ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(a_);
      if (ldlt_->info() != Eigen::Success) throw NumericalError("SymmetricSolver: LDLT factorization failed");
      const auto d = ldlt_->vectorD();
      if (d.size() > 0 && (d.minCoeff() <= 0.0 || !d.allFinite()))
        throw NumericalError("SymmetricSolver: matrix is not positive definite");
    } else {
      cg_ = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>();
      cg_->setTolerance(kSolveTolerance);
      cg_->setMaxIterations(10 * a_.rows());
      cg_->compute(a_);
      if (cg_->info() != Eigen::Success) throw NumericalError("SymmetricSolver: CG setup failed");
    }
  }

  Eigen::Index rows() const { return a_.rows(); }
  bool is_direct() const { return static_cast<bool>(ldlt_); }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    if (b.size() != a_.rows()) throw std::invalid_argument("SymmetricSolver: right-hand side has wrong size");
    if (b.size() == 0) return b;
    Eigen::VectorXd x = raw_solve(b);
    double err = backward_error(x, b);
    for (int it = 0; it < 2 && err > kSolveTolerance; ++it) {
      x += raw_solve(b - a_ * x);
      err = backward_error(x, b);
    }
    if (!(err <= kSolveTolerance)) {
      std::ostringstream os;
      os << "SymmetricSolver: residual check failed, backward error " << err;
      throw NumericalError(os.str());
    }
    return x;
  }

  double backward_error(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
    const double den = norm_a_ * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
    if (den == 0.0) return 0.0;
    return (b - a_ * x).lpNorm<Eigen::Infinity>() / den;
  }

 private:
  Eigen::VectorXd raw_solve(const Eigen::VectorXd& b) const {
    if (ldlt_) return ldlt_->solve(b);
    Eigen::VectorXd x = cg_->solve(b);
    if (cg_->info() != Eigen::Success) {
      std::ostringstream os;
      os << "SymmetricSolver: CG did not converge, achieved residual " << cg_->error();
      throw NumericalError(os.str());
    }
    return x;
  }

  SparseMatrix a_;
  double norm_a_ = 0.0;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg_;
};

/// Generalized eigenvalues of the symmetric pencil (A, B), B positive definite, ascending.
inline Eigen::VectorXd generalized_eigenvalues(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("generalized_eigenvalues: eigen-solve failed");
  return es.eigenvalues();
}

inline double min_generalized_eigenvalue(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto ev = generalized_eigenvalues(a, b);
  return ev.size() ? ev.minCoeff() : 0.0;
}

/// Largest |A(i,j) - A(j,i)|.
inline double asymmetry(const SparseMatrix& a) {
  SparseMatrix d = a - SparseMatrix(a.transpose());
  double m = 0.0;
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace sgfem
