#include "iwri/linear_solver.hpp"

#include "iwri/errors.hpp"
#include "iwri/grid.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <random>
#include <string>

namespace iwri {

SparseMatrix assemble_normal_matrix(const SparseMatrix& A, const SparseMatrix& P, double lambda) {
  if (A.rows() != A.cols() || P.cols() != A.cols()) {
    throw ShapeError("normal matrix needs square A (N x N) and P (M x N)");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
  SparseMatrix PtP = SparseMatrix(P.adjoint()) * P;
  SparseMatrix AtA = SparseMatrix(A.adjoint()) * A;
  SparseMatrix H = PtP + lambda * AtA;
  H.prune(Complex(0.0, 0.0));
  H.makeCompressed();
  return H;
}

struct HermitianFactorization::Impl {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

HermitianFactorization HermitianFactorization::factorize(const SparseMatrix& H) {
  if (H.rows() != H.cols()) throw ShapeError("factorize needs a square matrix");
  auto impl = std::make_shared<Impl>();
  impl->ldlt.compute(H);
  if (impl->ldlt.info() != Eigen::Success) {
    throw FactorizationError("LDL^H factorization failed (zero pivot)");
  }
  const RVector d = impl->ldlt.vectorD().real();
  const double scale = d.cwiseAbs().maxCoeff();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 1e-14 * scale)) {
      throw FactorizationError("non-positive pivot " + std::to_string(d[i]) + " at index " +
                                   std::to_string(i),
                               i);
    }
  }
  HermitianFactorization f;
  f.impl_ = std::move(impl);
  f.n_ = H.rows();
  return f;
}

CVector HermitianFactorization::solve(const CVector& rhs) const {
  if (rhs.size() != n_) throw ShapeError("rhs length does not match factorization");
  return impl_->ldlt.solve(rhs);
}

struct LuFactorization::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

LuFactorization LuFactorization::factorize(const SparseMatrix& A) {
  if (A.rows() != A.cols()) throw ShapeError("LU needs a square matrix");
  auto impl = std::make_shared<Impl>();
  SparseMatrix copy = A;
  copy.makeCompressed();
  impl->lu.analyzePattern(copy);
  impl->lu.factorize(copy);
  if (impl->lu.info() != Eigen::Success) {
    throw FactorizationError("sparse LU failed: " + impl->lu.lastErrorMessage());
  }
  LuFactorization f;
  f.impl_ = std::move(impl);
  f.n_ = A.rows();
  return f;
}

CVector LuFactorization::solve(const CVector& rhs) const {
  if (rhs.size() != n_) throw ShapeError("rhs length does not match factorization");
  return impl_->lu.solve(rhs);
}

CVector LuFactorization::solve_adjoint(const CVector& rhs) const {
  if (rhs.size() != n_) throw ShapeError("rhs length does not match factorization");
  return impl_->lu.adjoint().solve(rhs);
}

Mu1Estimate power_iteration_mu1(const LuFactorization& A, const SparseMatrix& P, double tol,
                                int max_it, std::uint64_t seed) {
  if (P.cols() != A.size()) throw ShapeError("P columns must match operator size");
  if (!(tol > 0.0)) throw ParameterError("power iteration tolerance must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  CVector v(A.size());
  for (Index i = 0; i < v.size(); ++i) v[i] = Complex(uni(rng), uni(rng));
  v.normalize();

  Mu1Estimate est;
  double previous = 0.0;
  for (int it = 1; it <= max_it; ++it) {
    const CVector w = A.solve(v);
    const CVector pw = P * w;
    const double rayleigh = pw.squaredNorm();  // v^H M v with |v| = 1
    CVector next = A.solve_adjoint(SparseMatrix(P.adjoint()) * pw);
    est.value = rayleigh;
    est.iterations = it;
    if (it > 1 && std::abs(rayleigh - previous) <= tol * std::abs(rayleigh)) {
      est.converged = true;
      break;
    }
    previous = rayleigh;
    const double norm = next.norm();
    if (norm == 0.0) {
      est.converged = true;  // v lies in the null space; M is zero along it
      break;
    }
    v = next / norm;
  }
  return est;
}

}  // namespace iwri
