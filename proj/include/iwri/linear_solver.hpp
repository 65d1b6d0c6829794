#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>
#include <memory>

namespace iwri {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;  // column-compressed
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// H = P^H P + lambda * A^H A.
SparseMatrix assemble_normal_matrix(const SparseMatrix& A, const SparseMatrix& P, double lambda);

/// LDL^H factorization of a Hermitian positive-definite sparse matrix.
/// Immutable once built; concurrent solves are safe.
class HermitianFactorization {
 public:
  /// Throws FactorizationError carrying the pivot index if a pivot is not
  /// numerically positive.
  static HermitianFactorization factorize(const SparseMatrix& H);

  CVector solve(const CVector& rhs) const;
  Index size() const { return n_; }

 private:
  struct Impl;
  HermitianFactorization() = default;
  std::shared_ptr<const Impl> impl_;
  Index n_ = 0;
};

/// General sparse LU with solves against A and A^H from the same factors.
class LuFactorization {
 public:
  static LuFactorization factorize(const SparseMatrix& A);

  CVector solve(const CVector& rhs) const;
  CVector solve_adjoint(const CVector& rhs) const;
  Index size() const { return n_; }

 private:
  struct Impl;
  LuFactorization() = default;
  std::shared_ptr<Impl> impl_;
  Index n_ = 0;
};

struct Mu1Estimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest eigenvalue of A^{-H} P^H P A^{-1} by power iteration from a seeded
/// pseudo-random start. Stops when successive Rayleigh quotients agree to
/// `tol` (relative); otherwise returns the last estimate with converged=false.
Mu1Estimate power_iteration_mu1(const LuFactorization& A, const SparseMatrix& P, double tol = 1e-4,
                                int max_it = 500, std::uint64_t seed = 20180701);

}  // namespace iwri
