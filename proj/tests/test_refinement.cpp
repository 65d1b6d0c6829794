#include "iwri/refinement.hpp"
#include "iwri/wri.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace iwri;

namespace {

using CProblem = DenseProblem<Complex>;

CProblem random_problem(std::mt19937_64& rng, Index m, Index n, double beta_scale) {
  CProblem p;
  p.A = test::random_cmatrix(m, n, rng);
  p.b = test::random_cvector(m, rng);
  const double norm2 = Eigen::JacobiSVD<Eigen::MatrixXcd>(p.A).singularValues()(0);
  p.beta = beta_scale * norm2 * norm2;
  return p;
}

}  // namespace

TEST_CASE("generalized inverse") {
  std::mt19937_64 rng(1);
  auto sq = random_problem(rng, 6, 6, 0.0);
  CHECK((pseudo_inverse_solve(sq) - sq.A.lu().solve(sq.b)).norm() < 1e-10 * sq.b.norm());

  const auto over = random_problem(rng, 6, 3, 0.0);
  const Eigen::MatrixXcd N = over.A.adjoint() * over.A;
  const CVector ref = N.llt().solve(over.A.adjoint() * over.b);
  CHECK((pseudo_inverse_solve(over) - ref).norm() < 1e-10 * ref.norm());

  double prev = std::numeric_limits<double>::infinity();
  const double a2 = std::pow(Eigen::JacobiSVD<Eigen::MatrixXcd>(sq.A).singularValues()(0), 2);
  for (double s : {1.0, 10.0, 100.0}) {
    sq.beta = s * a2;
    const double nx = pseudo_inverse_solve(sq).norm();
    CHECK(nx < prev);
    prev = nx;
  }

  CProblem rank_deficient{Eigen::MatrixXcd::Zero(3, 3), CVector::Ones(3), 0.0};
  CHECK_THROWS_AS(pseudo_inverse_solve(rank_deficient), FactorizationError);
  CProblem huge{Eigen::MatrixXcd::Zero(501, 2), CVector::Zero(501), 1.0};
  CHECK_THROWS_AS(pseudo_inverse_solve(huge), ShapeError);
  CHECK_THROWS_AS(iterative_refine(sq, 0), ParameterError);
}

TEST_CASE("refinement of an exact inverse is a fixed point") {
  std::mt19937_64 rng(2);
  const auto p = random_problem(rng, 8, 8, 0.0);
  const auto xs = iterative_refine_history(p, 6);
  for (const auto& x : xs) CHECK((x - xs.front()).norm() < 1e-10 * xs.front().norm());
}

TEST_CASE("damped refinement drives the residual down") {
  std::mt19937_64 rng(3);
  const auto p = random_problem(rng, 10, 10, 0.05);
  const auto xs = iterative_refine_history(p, 40);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    const double r = (p.A * x - p.b).norm();
    if (r < 1e-12 * p.b.norm()) break;  // numerical floor
    CHECK(r < prev);
    prev = r;
  }
  // slow modes contract by beta / (sigma^2 + beta) per step
  CHECK((p.A * xs.back() - p.b).norm() < 0.1 * (p.A * xs.front() - p.b).norm());
}

TEST_CASE("running-sum and perturbation forms agree with the one-shot solve") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<Index> dim(3, 30);
  std::uniform_real_distribution<double> lbeta(-2.0, 0.0);
  std::uniform_int_distribution<int> iters(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = dim(rng), m = n + dim(rng) % 5;
    const auto p = random_problem(rng, m, n, std::pow(10.0, lbeta(rng)));
    const int k = iters(rng);
    const auto xs = iterative_refine_history(p, k);
    CVector rhs = p.b;
    for (int i = 0; i + 1 < k; ++i) rhs += p.b - p.A * xs[static_cast<std::size_t>(i)];
    const CVector one_shot = damped_lsq_qr<Complex>(p.A, rhs, p.beta);
    CHECK((xs.back() - one_shot).norm() <= 1e-12 * one_shot.norm());
    CHECK((refine_by_perturbation(p, k) - xs.back()).norm() <= 1e-12 * one_shot.norm());
  }
}

TEST_CASE("IR-WRI wavefield steps at fixed m are refinement of the stacked system") {
  const auto c = test::tiny_case(8, 6, 2, 1, {5.0}, 9);
  std::mt19937_64 rng(10);
  const auto m = test::random_model(c.grid, rng, 2000.0, 2600.0);
  const auto stencil = c.setup.stencil(c.grid, 5.0);
  const SparseMatrix A = stencil->assemble(stencil->layout().extend(m.values));
  const SparseMatrix P = build_observation(stencil->layout(), c.geometry.receivers);
  const CVector b = build_source(stencil->layout(), c.geometry.sources[0], 1.0);
  const CVector& d = c.data.data[0][0];
  const double lambda = 30.0, sl = std::sqrt(lambda);

  // [P; sqrt(lambda) A] u = [d; sqrt(lambda) b], beta = 0
  const Index n = A.cols(), nr = P.rows();
  CProblem stacked;
  stacked.A.resize(nr + n, n);
  stacked.A.topRows(nr) = Eigen::MatrixXcd(P);
  stacked.A.bottomRows(n) = sl * Eigen::MatrixXcd(A);
  stacked.b.resize(nr + n);
  stacked.b.head(nr) = d;
  stacked.b.tail(n) = sl * b;
  const auto xs = iterative_refine_history(stacked, 4);

  CVector dd = CVector::Zero(nr), bd = CVector::Zero(n);
  for (int k = 0; k < 4; ++k) {
    const CVector u = reconstruct_wavefield(A, P, d + dd, b + bd, lambda);
    CHECK((u - xs[static_cast<std::size_t>(k)]).norm() < 1e-8 * u.norm());
    dd = update_data_dual(dd, d, P * u);
    bd = update_source_dual(bd, b, A * u, 1.0);
  }
}
