#pragma once

#include "iwri/grid.hpp"
#include "iwri/linear_solver.hpp"

#include <memory>
#include <optional>

namespace iwri {

/// Absorbing layers added outside the physical grid. A side that is not
/// padded behaves as a zero-pressure (free) surface.
struct PmlConfig {
  int n_layers = 10;
  double profile_exponent = 2.0;
  /// Peak damping sigma_max in 1/s. When empty it is derived from the
  /// reference velocity so a normally incident wave is attenuated by
  /// `target_reflection` after a round trip through the layer. The default
  /// (one-way 1e-6) is stronger than the continuous theory needs: ten layers
  /// are a fraction of a wavelength at low frequency, and the outer ring only
  /// drops below 1e-3 of the peak field around this value.
  std::optional<double> max_damping;
  double target_reflection = 1e-12;
  bool top = true;
  bool bottom = true;
  bool left = true;
  bool right = true;

  void validate() const;
  double resolved_damping(double thickness, double v_ref) const;
};

/// Rotated 9-point Laplacian blended with the standard 5-point one
/// (weight `laplacian_weight` on the 5-point part), plus the weights B uses to
/// spread the mass term over centre, edge and corner nodes.
struct StencilScheme {
  double laplacian_weight = 0.5461;
  double mass_center = 0.6248;
  double mass_edge = 0.09381;
  double mass_corner = (1.0 - 0.6248 - 4.0 * 0.09381) / 4.0;

  /// Anti-lumped-mass mixed 9-point scheme (fixed, frequency-independent weights).
  static StencilScheme nine_point();
  /// Plain 5-point Laplacian with lumped mass.
  static StencilScheme five_point();
  /// 9-point Laplacian with lumped mass (diagonal B).
  static StencilScheme nine_point_lumped();

  void validate() const;
  bool lumped() const { return mass_edge == 0.0 && mass_corner == 0.0; }
};

/// Physical grid embedded in the PML-padded computational grid.
class PaddedLayout {
 public:
  PaddedLayout() = default;
  PaddedLayout(const Grid2D& physical, const PmlConfig& pml);

  const Grid2D& physical() const { return physical_; }
  const Grid2D& padded() const { return padded_; }
  Index left() const { return left_; }
  Index right() const { return right_; }
  Index top() const { return top_; }
  Index bottom() const { return bottom_; }

  /// Padded index of physical cell (ix, iz).
  Index padded_index(Index ix, Index iz) const { return padded_.index(ix + left_, iz + top_); }
  Index padded_index(Index physical_linear) const;

  /// Edge-replicating extension of a physical field onto the padded grid.
  RVector extend(const RVector& physical_values) const;
  /// Sparse N_pad x N matrix of `extend`.
  Eigen::SparseMatrix<double> extension_matrix() const;
  /// Values of a padded field at the physical cells.
  CVector restrict_to_physical(const CVector& padded_values) const;

 private:
  Grid2D physical_;
  Grid2D padded_;
  Index left_ = 0, right_ = 0, top_ = 0, bottom_ = 0;
};

/// m-independent pieces of A(m) = Delta + omega^2 sym(B diag(C m)) at one
/// frequency, sym(X) = (X + X^T)/2: the stretched Laplacian Delta, the
/// spreading matrix B and the PML mass damping C.
class HelmholtzStencil {
 public:
  HelmholtzStencil(const Grid2D& physical, double omega, const PmlConfig& pml,
                   const StencilScheme& scheme, double v_ref);

  const PaddedLayout& layout() const { return layout_; }
  double omega() const { return omega_; }
  const SparseMatrix& laplacian() const { return laplacian_; }
  const SparseMatrix& spread() const { return spread_; }
  const CVector& damping() const { return damping_; }
  const StencilScheme& scheme() const { return scheme_; }

  /// A(m) for a padded squared-slowness field.
  SparseMatrix assemble(const RVector& m_pad) const;
  /// L(u) = omega^2/2 (B diag(C u) + diag(C Bu)), so that
  /// A(m) u = Delta u + L(u) m_pad.
  SparseMatrix mass_linearization(const CVector& u) const;

 private:
  PaddedLayout layout_;
  double omega_;
  StencilScheme scheme_;
  SparseMatrix laplacian_;
  SparseMatrix spread_;
  CVector damping_;
};

class HelmholtzOperator {
 public:
  HelmholtzOperator(std::shared_ptr<const HelmholtzStencil> stencil, SparseMatrix matrix)
      : stencil_(std::move(stencil)), matrix_(std::move(matrix)) {}

  const SparseMatrix& matrix() const { return matrix_; }
  const HelmholtzStencil& stencil() const { return *stencil_; }
  std::shared_ptr<const HelmholtzStencil> stencil_ptr() const { return stencil_; }
  const PaddedLayout& layout() const { return stencil_->layout(); }
  double omega() const { return stencil_->omega(); }

 private:
  std::shared_ptr<const HelmholtzStencil> stencil_;
  SparseMatrix matrix_;
};

/// Builds A(m) on the PML-padded grid. The PML reference velocity is the
/// maximum velocity of `m` unless `v_ref` is given.
HelmholtzOperator assemble_helmholtz(const SlownessSqModel& m, double omega, const PmlConfig& pml,
                                     const StencilScheme& scheme,
                                     std::optional<double> v_ref = std::nullopt);

SparseMatrix assemble_mass_linearization(const CVector& u, const Grid2D& physical, double omega,
                                         const PmlConfig& pml, const StencilScheme& scheme,
                                         double v_ref);

/// Solves A u = b by sparse LU; throws FactorizationError for singular A.
CVector forward_solve(const HelmholtzOperator& A, const CVector& b);

/// Point-source field -(i/4) H0^(1)(k r) in a homogeneous medium, matching
/// the sign and scaling of a unit-amplitude `build_source` impulse. The
/// source cell is set to zero.
CVector analytic_green_2d(const Grid2D& grid, double src_x, double src_z, double omega, double v0);

}  // namespace iwri
