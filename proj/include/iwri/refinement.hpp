#pragma once

// Iterative solution refinement for small dense systems: each step adds the
// current residual to a running right-hand side and re-applies the damped
// generalized inverse A^{-g} = (A^H A + beta I)^{-1} A^H.

#include "iwri/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

namespace iwri {

constexpr Eigen::Index kMaxRefinementDim = 500;

template <typename Scalar>
struct DenseProblem {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Matrix A;
  Vector b;
  double beta = 0.0;

  void validate() const {
    if (A.rows() == 0 || A.cols() == 0) throw ShapeError("empty refinement problem");
    if (A.rows() != b.size()) throw ShapeError("A and b have inconsistent sizes");
    if (A.rows() > kMaxRefinementDim || A.cols() > kMaxRefinementDim) {
      throw ShapeError("dense refinement is limited to dimension " + std::to_string(kMaxRefinementDim));
    }
    if (!(beta >= 0.0)) throw ParameterError("beta must be >= 0");
  }
};

/// Factorized A^{-g}; apply() maps a right-hand side to the damped solution.
template <typename Scalar>
class GeneralizedInverse {
 public:
  using Matrix = typename DenseProblem<Scalar>::Matrix;
  using Vector = typename DenseProblem<Scalar>::Vector;

  GeneralizedInverse(const Matrix& A, double beta) : A_(A) {
    Matrix N = A.adjoint() * A;
    N.diagonal().array() += Scalar(beta);
    lu_.compute(N);
    // rank-deficient A with beta = 0
    if (!lu_.isInvertible()) {
      throw FactorizationError("A^H A + beta I is singular", static_cast<long>(lu_.rank()));
    }
  }

  Vector apply(const Vector& rhs) const { return lu_.solve(A_.adjoint() * rhs); }

 private:
  Matrix A_;
  Eigen::FullPivLU<Matrix> lu_;
};

template <typename Scalar>
typename DenseProblem<Scalar>::Vector pseudo_inverse_solve(const DenseProblem<Scalar>& p) {
  p.validate();
  return GeneralizedInverse<Scalar>(p.A, p.beta).apply(p.b);
}

/// Running-sum form: x_k = A^{-g}(b + sum_{i<k} (b - A x_i)). Returns all
/// iterates x_1..x_k.
template <typename Scalar>
std::vector<typename DenseProblem<Scalar>::Vector> iterative_refine_history(const DenseProblem<Scalar>& p,
                                                                          int k) {
  p.validate();
  if (k < 1) throw ParameterError("refinement needs k >= 1");
  const GeneralizedInverse<Scalar> inv(p.A, p.beta);
  std::vector<typename DenseProblem<Scalar>::Vector> xs;
  typename DenseProblem<Scalar>::Vector rhs = p.b;
  xs.push_back(inv.apply(rhs));
  for (int i = 1; i < k; ++i) {
    rhs += p.b - p.A * xs.back();
    xs.push_back(inv.apply(rhs));
  }
  return xs;
}

template <typename Scalar>
typename DenseProblem<Scalar>::Vector iterative_refine(const DenseProblem<Scalar>& p, int k) {
  return iterative_refine_history(p, k).back();
}

/// Perturbation form: x_k = x_{k-1} + A^{-g}(b - A x_{k-1}).
template <typename Scalar>
typename DenseProblem<Scalar>::Vector refine_by_perturbation(const DenseProblem<Scalar>& p, int k) {
  p.validate();
  if (k < 1) throw ParameterError("refinement needs k >= 1");
  const GeneralizedInverse<Scalar> inv(p.A, p.beta);
  typename DenseProblem<Scalar>::Vector x = inv.apply(p.b);
  for (int i = 1; i < k; ++i) x += inv.apply(p.b - p.A * x);
  return x;
}

/// One-shot damped least squares min |A x - rhs|^2 + beta |x|^2, solved by QR
/// of the stacked system [A; sqrt(beta) I] so it shares nothing with the
/// normal-equation path.
template <typename Scalar>
typename DenseProblem<Scalar>::Vector damped_lsq_qr(const typename DenseProblem<Scalar>::Matrix& A,
                                                    const typename DenseProblem<Scalar>::Vector& rhs,
                                                    double beta) {
  using Matrix = typename DenseProblem<Scalar>::Matrix;
  using Vector = typename DenseProblem<Scalar>::Vector;
  const Eigen::Index m = A.rows(), n = A.cols();
  Matrix S = Matrix::Zero(m + n, n);
  S.topRows(m) = A;
  S.bottomRows(n).diagonal().setConstant(Scalar(std::sqrt(beta)));
  Vector r = Vector::Zero(m + n);
  r.head(m) = rhs;
  return S.colPivHouseholderQr().solve(r);
}

}  // namespace iwri
