#pragma once

#include "iwri/acquisition.hpp"
#include "iwri/grid.hpp"
#include "iwri/helmholtz.hpp"
#include "iwri/linear_solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace iwri {

/// WRI keeps both duals at zero (penalty method); ADMM updates them once per
/// cycle; PRSM updates the source dual after each primal subproblem.
enum class Variant { kWri, kAdmm, kPrsm };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// How the u-subproblem normal system P^H P + lambda A^H A is solved.
enum class NormalSolve {
  kLowRank,       ///< LU of A plus a rank-M Woodbury correction
  kNormalMatrix,  ///< explicit assembly and LDL^H factorization
};

enum class BoundMode { kSplitBregman, kClip };

struct PenaltyParams {
  Variant variant = Variant::kPrsm;
  double alpha = 0.5;
  int inner_iterations = 1;
  NormalSolve normal_solve = NormalSolve::kLowRank;
  BoundMode bound_mode = BoundMode::kSplitBregman;
  /// Bregman coupling as a multiple of the mean diagonal of sum L^H L.
  double bregman_weight = 0.1;
  /// Diagonal shift (relative to mean diagonal) guarding the m-update.
  double regularization = 1e-12;

  void validate() const;
};

/// One frequency of a batch: the m-independent stencil, sampling, sources,
/// observations and penalty weight.
struct FrequencySlot {
  double frequency = 0.0;
  std::shared_ptr<const HelmholtzStencil> stencil;
  SparseMatrix observation;
  std::vector<CVector> sources;       // b per source, padded grid
  std::vector<CVector> observed;      // d per source
  double lambda = 1.0;
  double noise_level = kNoiselessLevel;
  std::vector<CVector> true_wavefields;  // u* per source when known, padded grid
};

/// Static data of an inversion over one frequency batch.
class WriProblem {
 public:
  WriProblem(const Grid2D& grid, const AcquisitionGeometry& geometry, const FrequencyDataset& data,
             const std::vector<double>& batch, const std::vector<double>& lambdas,
             const ModelingSetup& setup, std::optional<Bounds> bounds = std::nullopt);

  /// Builds directly from prepared slots (tests and small experiments).
  WriProblem(const Grid2D& grid, std::vector<FrequencySlot> slots,
             std::optional<Bounds> bounds = std::nullopt);

  /// Enables model/wavefield error diagnostics against a known model.
  void set_truth(const SlownessSqModel& m_true);

  const Grid2D& grid() const { return grid_; }
  const PaddedLayout& layout() const { return slots_.front().stencil->layout(); }
  const std::vector<FrequencySlot>& slots() const { return slots_; }
  const std::optional<Bounds>& bounds() const { return bounds_; }
  const std::optional<RVector>& true_model() const { return true_model_; }
  const Eigen::SparseMatrix<double>& extension() const { return extension_; }
  std::size_t n_sources() const { return slots_.front().sources.size(); }
  std::size_t n_pairs() const { return slots_.size() * n_sources(); }

  RVector pad(const RVector& m) const { return layout().extend(m); }

 private:
  void finish();

  Grid2D grid_;
  std::vector<FrequencySlot> slots_;
  std::optional<Bounds> bounds_;
  std::optional<RVector> true_model_;
  Eigen::SparseMatrix<double> extension_;
};

using PairFields = std::vector<std::vector<CVector>>;  // [frequency][source]

/// Scaled duals: d_dual (data space) and b_dual (padded wavefield space).
struct DualState {
  PairFields d_dual;
  PairFields b_dual;

  static DualState zeros(const WriProblem& problem);
};

/// Split-Bregman auxiliary p (kept inside the bounds) and its dual q.
struct BoxConstraintState {
  RVector p;
  RVector q;
  double gamma_b = 0.0;
};

struct IterationState {
  RVector m;  // physical squared slowness
  PairFields u;
  DualState duals;
  std::optional<BoxConstraintState> box;
  int k = 0;
  long pde_solve_count = 0;
  bool regularized = false;  ///< set when the m-update needed an enlarged shift

  /// k = 0, zero duals, empty wavefields, p = clip(m0), q = 0.
  static IterationState initial(const WriProblem& problem, const RVector& m0);
};

/// Solver of the u-subproblem at fixed (A, P, lambda), shared by all sources.
class WavefieldSolver {
 public:
  WavefieldSolver(const SparseMatrix& A, const SparseMatrix& P, double lambda,
                  NormalSolve strategy = NormalSolve::kLowRank);

  /// argmin_u 1/2 |P u - d_eff|^2 + lambda/2 |A u - b_eff|^2.
  CVector solve(const CVector& d_eff, const CVector& b_eff) const;

 private:
  SparseMatrix A_;
  SparseMatrix P_;
  double lambda_;
  NormalSolve strategy_;
  std::optional<LuFactorization> lu_;
  Eigen::MatrixXcd z_;  // A^{-H} P^H
  Eigen::LLT<Eigen::MatrixXcd> capacitance_;
  std::optional<HermitianFactorization> normal_;
};

CVector reconstruct_wavefield(const SparseMatrix& A, const SparseMatrix& P, const CVector& d_eff,
                              const CVector& b_eff, double lambda,
                              NormalSolve strategy = NormalSolve::kLowRank);

/// d_dual + (d - P u).
CVector update_data_dual(const CVector& d_dual, const CVector& d, const CVector& Pu);
/// b_dual + alpha (b - A u).
CVector update_source_dual(const CVector& b_dual, const CVector& b, const CVector& Au, double alpha);

/// Normal equations of min_m sum |L(u) E m - y|^2 over real physical m,
/// accumulated pair by pair in a fixed order.
class ModelNormalEquations {
 public:
  explicit ModelNormalEquations(const WriProblem& problem);

  /// Adds Re(L^H L) and Re(L^H y) on the padded grid.
  void accumulate(const SparseMatrix& L, const CVector& y);
  ModelNormalEquations& operator+=(const ModelNormalEquations& other);

  /// E^T (sum Re(L^H L)) E on the physical grid.
  Eigen::SparseMatrix<double> matrix() const;
  /// E^T sum Re(L^H y).
  RVector rhs() const;

 private:
  const Eigen::SparseMatrix<double>* extension_;
  Eigen::SparseMatrix<double> padded_;
  RVector padded_rhs_;
};

struct ModelUpdate {
  RVector m;
  bool regularized = false;
};

/// Solves the accumulated normal equations with the bound handling of
/// `params`. With split-Bregman bounds, `box` is advanced and the returned
/// model is its in-bounds auxiliary p.
ModelUpdate estimate_model(const ModelNormalEquations& normal, const std::optional<Bounds>& bounds,
                           std::optional<BoxConstraintState>& box, const PenaltyParams& params);

struct ObjectiveTerms {
  double data_term = 0.0;  ///< 1/2 |P u - d_eff|^2
  double pde_term = 0.0;   ///< lambda/2 |A u - b_eff|^2
};

ObjectiveTerms wri_objective(const SparseMatrix& A, const SparseMatrix& P, const CVector& u,
                             const CVector& d_eff, const CVector& b_eff, double lambda);

/// Gradient of 1/2 |A(m) u - b_eff|^2 with respect to the physical m:
/// Re(E^T L(u)^H (A(m) u - b_eff)).
RVector wri_gradient_m(const HelmholtzStencil& stencil, const CVector& u, const RVector& m_physical,
                       const CVector& b_eff);

/// Residual norms of the current iterate against raw d and b, stacked over
/// all pairs of the batch.
struct Residuals {
  double data = 0.0;                 ///< |P u - d|_F
  double pde = 0.0;                  ///< |A(m) u - b|_F
  std::vector<double> data_per_freq;
  double model_error = -1.0;         ///< relative, -1 when unknown
  double wavefield_error = -1.0;     ///< relative on the physical grid, -1 when unknown
};

Residuals evaluate_residuals(const WriProblem& problem, const IterationState& state);

/// One outer cycle with a single inner iteration: u-update, dual step,
/// m-update, dual step (PRSM); ADMM and WRI differ only in the dual steps.
IterationState prsm_cycle(const IterationState& state, const WriProblem& problem,
                          const PenaltyParams& params);

/// Outer cycle with n wavefield-refinement steps at fixed m followed by n
/// model-refinement steps at fixed u.
IterationState inner_refine(const IterationState& state, const WriProblem& problem,
                            const PenaltyParams& params, int n);

}  // namespace iwri
