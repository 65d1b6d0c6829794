#include "iwri/acquisition.hpp"
#include "iwri/errors.hpp"
#include "iwri/helmholtz.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace iwri;

namespace {

PmlConfig no_pml() {
  PmlConfig p;
  p.n_layers = 0;
  return p;
}

Index max_row_nnz(const SparseMatrix& A) {
  const SparseMatrix At = A.transpose();  // rows of A as columns
  Index best = 0;
  for (Index j = 0; j < At.outerSize(); ++j) {
    Index n = 0;
    for (SparseMatrix::InnerIterator it(At, j); it; ++it) ++n;
    best = std::max(best, n);
  }
  return best;
}

}  // namespace

TEST_CASE("5-point scheme matches hand assembly on a 3x3 grid") {
  const double dx = 2.0, dz = 3.0, omega = 1.7;
  const Grid2D g(3, 3, dx, dz);
  SlownessSqModel m{g, RVector::LinSpaced(9, 1.0, 2.0)};
  const auto op = assemble_helmholtz(m, omega, no_pml(), StencilScheme::five_point(), 1.0);
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Zero(9, 9);
  for (Index iz = 0; iz < 3; ++iz) {
    for (Index ix = 0; ix < 3; ++ix) {
      const Index i = g.index(ix, iz);
      ref(i, i) = -2.0 / (dx * dx) - 2.0 / (dz * dz) + omega * omega * m.values[i];
      if (ix > 0) ref(i, g.index(ix - 1, iz)) = 1.0 / (dx * dx);
      if (ix < 2) ref(i, g.index(ix + 1, iz)) = 1.0 / (dx * dx);
      if (iz > 0) ref(i, g.index(ix, iz - 1)) = 1.0 / (dz * dz);
      if (iz < 2) ref(i, g.index(ix, iz + 1)) = 1.0 / (dz * dz);
    }
  }
  CHECK((Eigen::MatrixXcd(op.matrix()) - ref).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("operator structure") {
  const Grid2D g(9, 7, 10.0, 10.0);
  std::mt19937_64 rng(1);
  const auto m = test::random_model(g, rng);
  PmlConfig pml;
  pml.n_layers = 4;
  const auto op = assemble_helmholtz(m, 30.0, pml, StencilScheme::nine_point());
  CHECK(op.matrix().rows() == 17 * 15);
  CHECK(max_row_nnz(op.matrix()) <= 9);

  // omega -> 0: only the Laplacian survives (without PML, whose damping
  // grows like 1/omega)
  const auto low = assemble_helmholtz(m, 1e-9, no_pml(), StencilScheme::nine_point(), 3000.0);
  const auto& st = low.stencil();
  CHECK(SparseMatrix(low.matrix() - st.laplacian()).norm() < 1e-12 * st.laplacian().norm());
  CHECK_THROWS_AS(assemble_helmholtz(m, 0.0, pml, StencilScheme::nine_point()), ParameterError);
  CHECK_THROWS_AS(assemble_helmholtz(m, -1.0, pml, StencilScheme::nine_point()), ParameterError);
}

TEST_CASE("scheme weights") {
  CHECK_NOTHROW(StencilScheme::nine_point().validate());
  CHECK_NOTHROW(StencilScheme::five_point().validate());
  StencilScheme s = StencilScheme::nine_point();
  s.mass_center += 0.1;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}

TEST_CASE("mass linearization identity") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Grid2D g(6, 5, 10.0, 10.0);
    const auto m = test::random_model(g, rng);
    PmlConfig pml;
    pml.n_layers = 3;
    pml.top = trial % 2 == 0;
    const double omega = 2.0 * std::numbers::pi * (3.0 + trial);
    const auto op = assemble_helmholtz(m, omega, pml, StencilScheme::nine_point(), 3000.0);
    const auto& st = op.stencil();
    const CVector u = test::random_cvector(op.matrix().rows(), rng);
    const RVector m_pad = op.layout().extend(m.values);
    const CVector Au = op.matrix() * u;
    const CVector rhs = st.laplacian() * u + st.mass_linearization(u) * m_pad.cast<Complex>();
    CHECK((Au - rhs).cwiseAbs().maxCoeff() < 1e-12 * Au.cwiseAbs().maxCoeff());

    const SparseMatrix L2 = assemble_mass_linearization(u, g, omega, pml, StencilScheme::nine_point(), 3000.0);
    CHECK(SparseMatrix(L2 - st.mass_linearization(u)).norm() == 0.0);
  }
  const Grid2D g(6, 5, 10.0, 10.0);
  HelmholtzStencil st(g, 10.0, PmlConfig{}, StencilScheme::nine_point_lumped(), 2000.0);
  const Index n = st.layout().padded().size();
  CHECK(st.mass_linearization(CVector::Zero(n)).norm() == 0.0);
  const SparseMatrix L = st.mass_linearization(test::random_cvector(n, rng));
  const SparseMatrix LtL = SparseMatrix(L.adjoint()) * L;
  CHECK(LtL.nonZeros() == n);  // diagonal when the mass is lumped
  CHECK_THROWS_AS(st.mass_linearization(CVector::Zero(n - 1)), ShapeError);
}

TEST_CASE("forward solve") {
  const Grid2D g(20, 15, 10.0, 10.0);
  std::mt19937_64 rng(3);
  const auto m = test::random_model(g, rng);
  const auto op = assemble_helmholtz(m, 2.0 * std::numbers::pi * 6.0, PmlConfig{}, StencilScheme::nine_point());
  const CVector ones = CVector::Ones(op.matrix().rows());
  CHECK((forward_solve(op, op.matrix() * ones) - ones).norm() / ones.norm() < 1e-9);
  const CVector b = test::random_cvector(ones.size(), rng);
  CHECK((op.matrix() * forward_solve(op, b) - b).norm() / b.norm() < 1e-9);
}

TEST_CASE("plane-wave residual in the interior") {
  const Grid2D g(40, 40, 10.0, 10.0);
  const double v = 2000.0, f = 10.0;  // 20 points per wavelength
  const double omega = 2.0 * std::numbers::pi * f, k = omega / v;
  const auto m = velocity_to_slowness_sq(build_homogeneous(g, v));
  const auto op = assemble_helmholtz(m, omega, PmlConfig{}, StencilScheme::nine_point());
  const auto& lay = op.layout();
  const double kx = k * std::cos(0.4), kz = k * std::sin(0.4);
  CVector u(lay.padded().size());
  for (Index iz = 0; iz < lay.padded().nz; ++iz) {
    for (Index ix = 0; ix < lay.padded().nx; ++ix) {
      u[lay.padded().index(ix, iz)] = std::exp(Complex(0.0, kx * 10.0 * double(ix) + kz * 10.0 * double(iz)));
    }
  }
  const CVector r = op.matrix() * u;
  const double mass = omega * omega * m.values[0];
  double worst = 0.0;
  for (Index iz = 5; iz < g.nz - 5; ++iz) {
    for (Index ix = 5; ix < g.nx - 5; ++ix) worst = std::max(worst, std::abs(r[lay.padded_index(ix, iz)]));
  }
  CHECK(worst < 1e-2 * mass);
}

TEST_CASE("analytic Green's function asymptotics") {
  const Grid2D g(401, 3, 5.0, 5.0);
  const double v0 = 1800.0, omega = 2.0 * std::numbers::pi * 5.0, k = omega / v0;
  const CVector G = analytic_green_2d(g, 0.0, 5.0, omega, v0);
  CHECK(G[g.index(0, 1)] == Complex(0.0, 0.0));
  // r = 900 m and 1800 m: |u(2r)| / |u(r)| -> 1/sqrt(2)
  const double ratio = std::abs(G[g.index(360, 1)]) / std::abs(G[g.index(180, 1)]);
  CHECK(std::abs(ratio * std::sqrt(2.0) - 1.0) < 0.05);
  // phase advances by 2 pi over one wavelength (360 m = 72 cells)
  const double lam_cells = 2.0 * std::numbers::pi / k / g.dx;
  const auto i0 = Index(150), i1 = i0 + static_cast<Index>(std::lround(lam_cells));
  const double dphi = std::arg(G[g.index(i1, 1)] / G[g.index(i0, 1)]);
  const double expected = k * g.dx * double(i1 - i0) - 2.0 * std::numbers::pi;
  CHECK(std::abs(dphi - expected) < 0.01 * 2.0 * std::numbers::pi);
}

TEST_CASE("PML absorbs outgoing energy") {
  const Grid2D g(81, 81, 10.0, 10.0);
  const auto m = velocity_to_slowness_sq(build_homogeneous(g, 1800.0));
  const auto op = assemble_helmholtz(m, 2.0 * std::numbers::pi * 5.0, PmlConfig{}, StencilScheme::nine_point());
  const CVector b = build_source(op.layout(), {400.0, 400.0}, 1.0);
  const CVector u = forward_solve(op, b);
  const Grid2D& p = op.layout().padded();
  double ring = 0.0;
  for (Index ix = 0; ix < p.nx; ++ix) {
    ring = std::max({ring, std::abs(u[p.index(ix, 0)]), std::abs(u[p.index(ix, p.nz - 1)])});
  }
  for (Index iz = 0; iz < p.nz; ++iz) {
    ring = std::max({ring, std::abs(u[p.index(0, iz)]), std::abs(u[p.index(p.nx - 1, iz)])});
  }
  CHECK(ring < 1e-3 * u.cwiseAbs().maxCoeff());
}

TEST_CASE("numerical Green's function matches the analytic one") {
  const Grid2D g(251, 81, 10.0, 10.0);
  const double v0 = 1800.0, omega = 2.0 * std::numbers::pi * 5.0;
  const auto m = velocity_to_slowness_sq(build_homogeneous(g, v0));
  const auto op = assemble_helmholtz(m, omega, PmlConfig{}, StencilScheme::nine_point());
  const CVector u = op.layout().restrict_to_physical(forward_solve(op, build_source(op.layout(), {1250.0, 400.0}, 1.0)));
  const CVector G = analytic_green_2d(g, 1250.0, 400.0, omega, v0);
  const double lam = v0 / 5.0;
  for (Index ix = 125; ix < g.nx - 5; ++ix) {
    const double r = 10.0 * double(ix - 125);
    if (r < 3.0 * lam) continue;
    const Index i = g.index(ix, 40);
    CHECK(std::abs(std::abs(u[i]) / std::abs(G[i]) - 1.0) < 0.05);
    CHECK(std::abs(std::arg(u[i] / G[i])) < 0.05);
  }
}

TEST_CASE("reciprocity") {
  const Grid2D g(60, 50, 10.0, 10.0);
  std::mt19937_64 rng(11);
  const auto m = test::random_model(g, rng, 1800.0, 2400.0);
  const auto op = assemble_helmholtz(m, 2.0 * std::numbers::pi * 6.0, PmlConfig{}, StencilScheme::nine_point());
  const auto& lay = op.layout();
  const Position a{120.0, 90.0}, b{430.0, 370.0};
  const CVector ua = forward_solve(op, build_source(lay, a, 1.0));
  const CVector ub = forward_solve(op, build_source(lay, b, 1.0));
  const Complex gab = ua[lay.padded_index(43, 37)], gba = ub[lay.padded_index(12, 9)];
  CHECK(std::abs(gab - gba) < 1e-6 * std::abs(gab));
}
