#pragma once

// Shared fixtures and dense reference computations for the test suites.

#include "iwri/acquisition.hpp"
#include "iwri/grid.hpp"
#include "iwri/helmholtz.hpp"
#include "iwri/wri.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace iwri::test {

inline CVector random_cvector(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * Complex(g(rng), g(rng));
  return v;
}

inline Eigen::MatrixXcd random_cmatrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(r, c);
  for (Index j = 0; j < c; ++j) {
    for (Index i = 0; i < r; ++i) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

/// Random velocities in [lo, hi] as squared slowness.
inline SlownessSqModel random_model(const Grid2D& g, std::mt19937_64& rng, double lo = 1500.0,
                                    double hi = 3000.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  SlownessSqModel m{g, RVector(g.size())};
  for (Index i = 0; i < g.size(); ++i) {
    const double v = u(rng);
    m.values[i] = 1.0 / (v * v);
  }
  return m;
}

/// Least-squares solution of [sqrt(lambda) A; P] u = [sqrt(lambda) b; d] by
/// dense QR, independent of any normal-equation formulation.
inline CVector dense_stacked_lsq(const SparseMatrix& A, const SparseMatrix& P, const CVector& b,
                                 const CVector& d, double lambda) {
  const Index n = A.cols(), m = P.rows();
  Eigen::MatrixXcd S(n + m, n);
  S.topRows(n) = std::sqrt(lambda) * Eigen::MatrixXcd(A);
  S.bottomRows(m) = Eigen::MatrixXcd(P);
  CVector r(n + m);
  r.head(n) = std::sqrt(lambda) * b;
  r.tail(m) = d;
  return S.householderQr().solve(r);
}

inline ModelingSetup small_setup(int layers = 2) {
  ModelingSetup s;
  s.pml.n_layers = layers;
  s.pml_velocity = 3000.0;
  s.ricker_f0 = 10.0;
  return s;
}

/// A small multi-frequency inversion problem with data synthesized from
/// `m_true`. Receivers are spread along the right edge, sources along the left.
struct TinyCase {
  Grid2D grid;
  AcquisitionGeometry geometry;
  FrequencyDataset data;
  ModelingSetup setup;
  SlownessSqModel m_true;
};

inline TinyCase tiny_case(Index nx, Index nz, int n_receivers, int n_sources, std::vector<double> freqs,
                          std::uint64_t seed, int pml_layers = 2,
                          StencilScheme scheme = StencilScheme::nine_point()) {
  TinyCase c;
  c.grid = Grid2D(nx, nz, 10.0, 10.0);
  std::mt19937_64 rng(seed);
  c.m_true = random_model(c.grid, rng, 2000.0, 2600.0);
  for (int s = 0; s < n_sources; ++s) {
    c.geometry.sources.push_back({10.0, 10.0 * static_cast<double>(1 + s % (nz - 2))});
  }
  for (int r = 0; r < n_receivers; ++r) {
    c.geometry.receivers.push_back({10.0 * static_cast<double>(nx - 2),
                                    10.0 * static_cast<double>(r % nz)});
  }
  c.setup = small_setup(pml_layers);
  c.setup.scheme = scheme;
  c.data = synthesize_data(c.m_true, c.geometry, freqs, c.setup);
  return c;
}

inline WriProblem tiny_problem(const TinyCase& c, std::vector<double> lambdas,
                               std::optional<Bounds> bounds = std::nullopt) {
  WriProblem p(c.grid, c.geometry, c.data, c.data.frequencies, lambdas, c.setup, bounds);
  p.set_truth(c.m_true);
  return p;
}

}  // namespace iwri::test
