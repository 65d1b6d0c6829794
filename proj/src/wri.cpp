#include "iwri/wri.hpp"

#include "iwri/errors.hpp"
#include "iwri/parallel.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace iwri {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kWri:
      return "wri";
    case Variant::kAdmm:
      return "admm";
    case Variant::kPrsm:
      return "prsm";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "wri") return Variant::kWri;
  if (name == "admm") return Variant::kAdmm;
  if (name == "prsm" || name == "irwri" || name == "ir-wri") return Variant::kPrsm;
  throw ConfigError("unknown variant '" + name + "' (expected wri, admm or prsm)");
}

void PenaltyParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
  if (inner_iterations < 1) throw ParameterError("inner iteration count must be >= 1");
  if (!(bregman_weight > 0.0)) throw ParameterError("Bregman weight must be positive");
  if (!(regularization >= 0.0)) throw ParameterError("regularization must be >= 0");
}

// ---------------------------------------------------------------------------
// Problem setup

WriProblem::WriProblem(const Grid2D& grid, const AcquisitionGeometry& geometry,
                       const FrequencyDataset& data, const std::vector<double>& batch,
                       const std::vector<double>& lambdas, const ModelingSetup& setup,
                       std::optional<Bounds> bounds)
    : grid_(grid), bounds_(bounds) {
  geometry.validate(grid);
  data.validate();
  if (batch.empty()) throw ShapeError("frequency batch is empty");
  if (lambdas.size() != batch.size()) throw ShapeError("need one lambda per batch frequency");
  if (data.n_sources != static_cast<Index>(geometry.sources.size()) ||
      data.n_receivers != static_cast<Index>(geometry.receivers.size())) {
    throw ShapeError("dataset does not match the acquisition geometry");
  }
  slots_.resize(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const Index fi = data.frequency_index(batch[i]);
    FrequencySlot& slot = slots_[i];
    slot.frequency = batch[i];
    slot.stencil = setup.stencil(grid, batch[i]);
    slot.observation = build_observation(slot.stencil->layout(), geometry.receivers);
    const double w = ricker_spectrum(batch[i], setup.ricker_f0);
    for (const auto& src : geometry.sources) {
      slot.sources.push_back(build_source(slot.stencil->layout(), src, Complex(w, 0.0)));
    }
    slot.observed = data.data[static_cast<std::size_t>(fi)];
    slot.lambda = lambdas[i];
    slot.noise_level = data.noise_level[static_cast<std::size_t>(fi)];
  });
  finish();
}

WriProblem::WriProblem(const Grid2D& grid, std::vector<FrequencySlot> slots,
                       std::optional<Bounds> bounds)
    : grid_(grid), slots_(std::move(slots)), bounds_(bounds) {
  finish();
}

void WriProblem::finish() {
  if (slots_.empty()) throw ShapeError("problem has no frequencies");
  const std::size_t ns = slots_.front().sources.size();
  if (ns == 0) throw ShapeError("problem has no sources");
  for (const auto& s : slots_) {
    if (!s.stencil) throw ShapeError("frequency slot without stencil");
    if (!(s.stencil->layout().physical() == grid_)) throw ShapeError("slot grid mismatch");
    if (s.sources.size() != ns || s.observed.size() != ns) throw ShapeError("slot source count mismatch");
    if (!(s.lambda > 0.0) || !std::isfinite(s.lambda)) throw ParameterError("lambda must be positive");
    for (const auto& d : s.observed) {
      if (d.size() != s.observation.rows()) throw ShapeError("observed data length mismatch");
    }
  }
  extension_ = layout().extension_matrix();
}

void WriProblem::set_truth(const SlownessSqModel& m_true) {
  if (!(m_true.grid == grid_)) throw ShapeError("true model grid mismatch");
  true_model_ = m_true.values;
  const RVector m_pad = pad(m_true.values);
  parallel_for(slots_.size(), [&](std::size_t f) {
    auto& slot = slots_[f];
    const auto lu = LuFactorization::factorize(slot.stencil->assemble(m_pad));
    slot.true_wavefields.clear();
    for (const auto& b : slot.sources) slot.true_wavefields.push_back(lu.solve(b));
  });
}

DualState DualState::zeros(const WriProblem& problem) {
  DualState d;
  for (const auto& slot : problem.slots()) {
    std::vector<CVector> dd, bd;
    for (std::size_t s = 0; s < slot.sources.size(); ++s) {
      dd.push_back(CVector::Zero(slot.observation.rows()));
      bd.push_back(CVector::Zero(slot.sources[s].size()));
    }
    d.d_dual.push_back(std::move(dd));
    d.b_dual.push_back(std::move(bd));
  }
  return d;
}

namespace {

RVector clip(const RVector& m, const Bounds& b) { return m.cwiseMax(b.m_lo()).cwiseMin(b.m_hi()); }

}  // namespace

IterationState IterationState::initial(const WriProblem& problem, const RVector& m0) {
  if (m0.size() != problem.grid().size()) throw ShapeError("initial model size mismatch");
  IterationState st;
  st.m = m0;
  st.duals = DualState::zeros(problem);
  for (const auto& slot : problem.slots()) {
    st.u.emplace_back(slot.sources.size(), CVector::Zero(slot.sources.front().size()));
  }
  if (problem.bounds()) {
    st.m = clip(m0, *problem.bounds());
    st.box = BoxConstraintState{st.m, RVector::Zero(m0.size()), 0.0};
  }
  return st;
}

// ---------------------------------------------------------------------------
// Wavefield subproblem

WavefieldSolver::WavefieldSolver(const SparseMatrix& A, const SparseMatrix& P, double lambda,
                                 NormalSolve strategy)
    : A_(A), P_(P), lambda_(lambda), strategy_(strategy) {
  if (A.rows() != A.cols() || P.cols() != A.cols()) throw ShapeError("wavefield solver shape mismatch");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be positive");
  if (strategy == NormalSolve::kNormalMatrix) {
    normal_ = HermitianFactorization::factorize(assemble_normal_matrix(A, P, lambda));
    return;
  }
  // H = A^H (lambda I + Z Z^H) A with Z = A^{-H} P^H, inverted by Woodbury.
  lu_ = LuFactorization::factorize(A);
  const SparseMatrix Ph = P.adjoint();
  z_.resize(A.rows(), P.rows());
  for (Index r = 0; r < P.rows(); ++r) {
    z_.col(r) = lu_->solve_adjoint(CVector(Ph.col(r)));
  }
  Eigen::MatrixXcd K = z_.adjoint() * z_;
  K.diagonal().array() += lambda;
  capacitance_.compute(K);
  if (capacitance_.info() != Eigen::Success) throw FactorizationError("capacitance matrix is not positive definite");
}

CVector WavefieldSolver::solve(const CVector& d_eff, const CVector& b_eff) const {
  if (d_eff.size() != P_.rows() || b_eff.size() != A_.rows()) throw ShapeError("rhs shape mismatch");
  if (strategy_ == NormalSolve::kNormalMatrix) {
    const CVector rhs = P_.adjoint() * d_eff + lambda_ * (A_.adjoint() * b_eff);
    return normal_->solve(rhs);
  }
  // A^{-H} (P^H d + lambda A^H b) = Z d + lambda b.
  const CVector s = z_ * d_eff + lambda_ * b_eff;
  const CVector t = s - z_ * capacitance_.solve(z_.adjoint() * s);
  return lu_->solve(t) / lambda_;
}

CVector reconstruct_wavefield(const SparseMatrix& A, const SparseMatrix& P, const CVector& d_eff,
                              const CVector& b_eff, double lambda, NormalSolve strategy) {
  return WavefieldSolver(A, P, lambda, strategy).solve(d_eff, b_eff);
}

CVector update_data_dual(const CVector& d_dual, const CVector& d, const CVector& Pu) {
  if (d_dual.size() != d.size() || Pu.size() != d.size()) throw ShapeError("data dual shape mismatch");
  return d_dual + (d - Pu);
}

CVector update_source_dual(const CVector& b_dual, const CVector& b, const CVector& Au, double alpha) {
  if (b_dual.size() != b.size() || Au.size() != b.size()) throw ShapeError("source dual shape mismatch");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
  return b_dual + alpha * (b - Au);
}

// ---------------------------------------------------------------------------
// Model subproblem

ModelNormalEquations::ModelNormalEquations(const WriProblem& problem)
    : extension_(&problem.extension()),
      padded_(problem.extension().rows(), problem.extension().rows()),
      padded_rhs_(RVector::Zero(problem.extension().rows())) {}

void ModelNormalEquations::accumulate(const SparseMatrix& L, const CVector& y) {
  if (L.rows() != y.size() || L.cols() != padded_.cols()) throw ShapeError("linearization shape mismatch");
  const SparseMatrix Lh = L.adjoint();
  const SparseMatrix LhL = Lh * L;
  padded_ += Eigen::SparseMatrix<double>(LhL.real());
  padded_rhs_ += (Lh * y).real();
}

ModelNormalEquations& ModelNormalEquations::operator+=(const ModelNormalEquations& other) {
  if (other.padded_.rows() != padded_.rows()) throw ShapeError("normal equation size mismatch");
  padded_ += other.padded_;
  padded_rhs_ += other.padded_rhs_;
  return *this;
}

Eigen::SparseMatrix<double> ModelNormalEquations::matrix() const {
  const Eigen::SparseMatrix<double> Et = extension_->transpose();
  Eigen::SparseMatrix<double> N = Et * padded_ * (*extension_);
  N.makeCompressed();
  return N;
}

RVector ModelNormalEquations::rhs() const { return extension_->transpose() * padded_rhs_; }

namespace {

// Solves (N + shift I) x = r; enlarges the shift if the factorization breaks down.
RVector solve_shifted(const Eigen::SparseMatrix<double>& N, double shift, const RVector& r,
                      bool& regularized) {
  Eigen::SparseMatrix<double> I(N.rows(), N.cols());
  I.setIdentity();
  const double mean_diag = std::max(N.diagonal().mean(), 1e-300);
  double current = shift;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    Eigen::SparseMatrix<double> M = N + current * I;
    ldlt.compute(M);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) ok = (ldlt.vectorD().array() > 0.0).all();
    if (ok) {
      RVector x = ldlt.solve(r);
      if (x.allFinite()) return x;
    }
    regularized = true;
    current = std::max(current * 1e4, 1e-8 * mean_diag);
  }
  throw FactorizationError("model normal equations are singular");
}

}  // namespace

ModelUpdate estimate_model(const ModelNormalEquations& normal, const std::optional<Bounds>& bounds,
                           std::optional<BoxConstraintState>& box, const PenaltyParams& params) {
  const Eigen::SparseMatrix<double> N = normal.matrix();
  const RVector r = normal.rhs();
  const double mean_diag = N.diagonal().mean();
  const double shift = params.regularization * mean_diag;
  ModelUpdate out;

  if (bounds && params.bound_mode == BoundMode::kSplitBregman) {
    if (!box) box = BoxConstraintState{RVector::Constant(r.size(), bounds->m_lo()), RVector::Zero(r.size()), 0.0};
    if (box->p.size() != r.size()) throw ShapeError("box state size mismatch");
    const double gamma = params.bregman_weight * mean_diag;
    box->gamma_b = gamma;
    const RVector m = solve_shifted(N, gamma + shift, r + gamma * (box->p - box->q), out.regularized);
    box->p = clip(m + box->q, *bounds);
    box->q += m - box->p;
    out.m = box->p;
    return out;
  }
  const RVector m = solve_shifted(N, shift, r, out.regularized);
  out.m = bounds ? clip(m, *bounds) : m;
  return out;
}

ObjectiveTerms wri_objective(const SparseMatrix& A, const SparseMatrix& P, const CVector& u,
                             const CVector& d_eff, const CVector& b_eff, double lambda) {
  if (u.size() != A.cols() || d_eff.size() != P.rows() || b_eff.size() != A.rows() ||
      P.cols() != A.cols()) {
    throw ShapeError("objective shape mismatch");
  }
  return {0.5 * (P * u - d_eff).squaredNorm(), 0.5 * lambda * (A * u - b_eff).squaredNorm()};
}

RVector wri_gradient_m(const HelmholtzStencil& stencil, const CVector& u, const RVector& m_physical,
                       const CVector& b_eff) {
  const auto& layout = stencil.layout();
  if (m_physical.size() != layout.physical().size() || u.size() != layout.padded().size() ||
      b_eff.size() != u.size()) {
    throw ShapeError("gradient shape mismatch");
  }
  const CVector residual = stencil.assemble(layout.extend(m_physical)) * u - b_eff;
  const RVector g_pad = (stencil.mass_linearization(u).adjoint() * residual).real();
  return layout.extension_matrix().transpose() * g_pad;
}

Residuals evaluate_residuals(const WriProblem& problem, const IterationState& state) {
  const auto& slots = problem.slots();
  const RVector m_pad = problem.pad(state.m);
  Residuals res;
  res.data_per_freq.assign(slots.size(), 0.0);
  std::vector<double> pde_sq(slots.size(), 0.0);
  std::vector<double> wf_err_sq(slots.size(), 0.0);
  std::vector<double> wf_ref_sq(slots.size(), 0.0);
  const auto& layout = problem.layout();
  parallel_for(slots.size(), [&](std::size_t f) {
    const auto& slot = slots[f];
    const SparseMatrix A = slot.stencil->assemble(m_pad);
    double data_sq = 0.0;
    for (std::size_t s = 0; s < slot.sources.size(); ++s) {
      const CVector& u = state.u[f][s];
      data_sq += (slot.observation * u - slot.observed[s]).squaredNorm();
      pde_sq[f] += (A * u - slot.sources[s]).squaredNorm();
      if (!slot.true_wavefields.empty()) {
        const CVector ut = layout.restrict_to_physical(slot.true_wavefields[s]);
        wf_err_sq[f] += (layout.restrict_to_physical(u) - ut).squaredNorm();
        wf_ref_sq[f] += ut.squaredNorm();
      }
    }
    res.data_per_freq[f] = std::sqrt(data_sq);
  });
  double data_sq = 0.0, pde_total = 0.0, err = 0.0, ref = 0.0;
  for (std::size_t f = 0; f < slots.size(); ++f) {
    data_sq += res.data_per_freq[f] * res.data_per_freq[f];
    pde_total += pde_sq[f];
    err += wf_err_sq[f];
    ref += wf_ref_sq[f];
  }
  res.data = std::sqrt(data_sq);
  res.pde = std::sqrt(pde_total);
  if (ref > 0.0) res.wavefield_error = std::sqrt(err / ref);
  if (const auto& mt = problem.true_model()) res.model_error = (state.m - *mt).norm() / mt->norm();
  return res;
}

// ---------------------------------------------------------------------------
// Outer cycle

namespace {

IterationState run_cycle(const IterationState& state, const WriProblem& problem,
                         const PenaltyParams& params, int n) {
  params.validate();
  if (n < 1) throw ParameterError("inner iteration count must be >= 1");
  const auto& slots = problem.slots();
  const std::size_t nf = slots.size();
  if (state.u.size() != nf || state.duals.b_dual.size() != nf) throw ShapeError("state does not match problem");

  IterationState next = state;
  const bool update_duals = params.variant != Variant::kWri;
  const RVector m_pad = problem.pad(state.m);

  // Wavefield reconstruction at fixed m^k, with data dual and (PRSM) half
  // source dual refreshed after every inner step.
  parallel_for(nf, [&](std::size_t f) {
    const auto& slot = slots[f];
    const SparseMatrix A = slot.stencil->assemble(m_pad);
    const WavefieldSolver solver(A, slot.observation, slot.lambda, params.normal_solve);
    for (std::size_t s = 0; s < slot.sources.size(); ++s) {
      CVector& u = next.u[f][s];
      CVector& dd = next.duals.d_dual[f][s];
      CVector& bd = next.duals.b_dual[f][s];
      for (int j = 0; j < n; ++j) {
        u = solver.solve(slot.observed[s] + dd, slot.sources[s] + bd);
        if (!update_duals) continue;
        dd = update_data_dual(dd, slot.observed[s], slot.observation * u);
        if (params.variant == Variant::kPrsm) bd = update_source_dual(bd, slot.sources[s], A * u, params.alpha);
      }
    }
  });
  next.pde_solve_count += static_cast<long>(n) * static_cast<long>(problem.n_pairs());

  // Model estimation at fixed u^{k+1}, linear in m because C is m-independent.
  for (int j = 0; j < n; ++j) {
    std::vector<ModelNormalEquations> partial(nf, ModelNormalEquations(problem));
    parallel_for(nf, [&](std::size_t f) {
      const auto& slot = slots[f];
      for (std::size_t s = 0; s < slot.sources.size(); ++s) {
        const CVector& u = next.u[f][s];
        const CVector y = slot.sources[s] + next.duals.b_dual[f][s] - slot.stencil->laplacian() * u;
        partial[f].accumulate(slot.stencil->mass_linearization(u), y);
      }
    });
    ModelNormalEquations total(problem);
    for (const auto& p : partial) total += p;
    const ModelUpdate upd = estimate_model(total, problem.bounds(), next.box, params);
    next.m = upd.m;
    next.regularized = next.regularized || upd.regularized;

    if (!update_duals) continue;
    const double step = params.variant == Variant::kPrsm ? params.alpha : 1.0;
    const RVector m_next_pad = problem.pad(next.m);
    parallel_for(nf, [&](std::size_t f) {
      const auto& slot = slots[f];
      const SparseMatrix A = slot.stencil->assemble(m_next_pad);
      for (std::size_t s = 0; s < slot.sources.size(); ++s) {
        next.duals.b_dual[f][s] =
            update_source_dual(next.duals.b_dual[f][s], slot.sources[s], A * next.u[f][s], step);
      }
    });
  }
  next.k = state.k + 1;
  return next;
}

}  // namespace

IterationState prsm_cycle(const IterationState& state, const WriProblem& problem,
                          const PenaltyParams& params) {
  return run_cycle(state, problem, params, 1);
}

IterationState inner_refine(const IterationState& state, const WriProblem& problem,
                            const PenaltyParams& params, int n) {
  return run_cycle(state, problem, params, n);
}

}  // namespace iwri
