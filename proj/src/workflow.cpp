#include "iwri/workflow.hpp"

#include "iwri/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace iwri {

std::optional<int> ConvergenceRecord::first_below_pde(double threshold) const {
  for (const auto& r : rows) {
    if (r.pde_misfit <= threshold) return r.k;
  }
  return std::nullopt;
}

void ContinuationPlan::validate() const {
  if (batches.empty()) throw ConfigError("continuation plan has no batches");
  for (const auto& b : batches) {
    if (b.empty()) throw ConfigError("continuation plan has an empty batch");
  }
  for (auto p : paths) {
    if (p >= batches.size()) throw ConfigError("path start index " + std::to_string(p) + " is out of range");
  }
  if (!k_max.empty() && k_max.size() != batches.size()) {
    throw ConfigError("per-batch k_max needs one entry per batch");
  }
}

ContinuationPlan ContinuationPlan::singletons(const std::vector<double>& freqs) {
  ContinuationPlan plan;
  for (double f : freqs) plan.batches.push_back({f});
  return plan;
}

ContinuationPlan ContinuationPlan::sliding(const std::vector<double>& freqs, std::size_t size,
                                           std::size_t overlap) {
  if (size == 0 || overlap >= size) throw ConfigError("batch size must exceed the overlap");
  ContinuationPlan plan;
  for (std::size_t start = 0; start < freqs.size(); start += size - overlap) {
    const std::size_t end = std::min(freqs.size(), start + size);
    plan.batches.emplace_back(freqs.begin() + static_cast<std::ptrdiff_t>(start),
                              freqs.begin() + static_cast<std::ptrdiff_t>(end));
    if (end == freqs.size()) break;
  }
  return plan;
}

void StoppingCriteria::validate() const {
  if (k_max < 1) throw ConfigError("k_max must be >= 1");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (delta_relative && !(*delta_relative > 0.0)) throw ConfigError("relative delta must be positive");
  for (double e : eps_n) {
    if (!(e >= 0.0)) throw ConfigError("eps_n must be >= 0");
  }
}

std::string to_string(StopDecision d) {
  switch (d) {
    case StopDecision::kContinue:
      return "continue";
    case StopDecision::kStopKmax:
      return "stop_kmax";
    case StopDecision::kStopConverged:
      return "stop_converged";
  }
  return "unknown";
}

StopDecision check_stop(int k, double pde_residual, const std::vector<double>& data_residuals,
                        int k_max, double delta, const std::vector<double>& eps_n) {
  if (data_residuals.size() != eps_n.size()) throw ShapeError("one eps_n per frequency is required");
  bool converged = pde_residual <= delta;
  for (std::size_t f = 0; f < eps_n.size() && converged; ++f) converged = data_residuals[f] <= eps_n[f];
  if (converged) return StopDecision::kStopConverged;
  if (k >= k_max) return StopDecision::kStopKmax;
  return StopDecision::kContinue;
}

double compute_lambda(double mu1, double fraction) {
  if (!(mu1 > 0.0) || !(fraction > 0.0)) throw ParameterError("mu1 and fraction must be positive");
  return fraction * mu1;
}

Mu1Estimate estimate_mu1(const SlownessSqModel& m, const AcquisitionGeometry& geometry,
                         double freq_hz, const ModelingSetup& setup, const LambdaPolicy& policy) {
  const auto stencil = setup.stencil(m.grid, freq_hz);
  const auto lu = LuFactorization::factorize(stencil->assemble(stencil->layout().extend(m.values)));
  const SparseMatrix P = build_observation(stencil->layout(), geometry.receivers);
  return power_iteration_mu1(lu, P, policy.mu1_tol, policy.mu1_max_it, policy.seed);
}

BatchResult run_batch(const RVector& model_in, const WriProblem& problem, const PenaltyParams& params,
                      const StoppingCriteria& criteria, const BatchOptions& options,
                      const IterationState* state0) {
  params.validate();
  criteria.validate();
  const auto& slots = problem.slots();
  std::vector<double> eps = criteria.eps_n;
  if (eps.empty()) {
    for (const auto& s : slots) eps.push_back(s.noise_level);
  }
  if (eps.size() != slots.size()) throw ConfigError("eps_n needs one value per batch frequency");

  IterationState state = IterationState::initial(problem, model_in);
  if (state0 && !options.reset_duals) {
    state.duals = state0->duals;
    if (state0->box) state.box = state0->box;
  }

  BatchResult out;
  out.record.rows.reserve(static_cast<std::size_t>(criteria.k_max));
  double delta = criteria.delta;
  const auto t0 = std::chrono::steady_clock::now();
  while (true) {
    state = inner_refine(state, problem, params, params.inner_iterations);
    const Residuals res = evaluate_residuals(problem, state);
    if (state.k == 1 && criteria.delta_relative) delta = *criteria.delta_relative * res.pde;

    ConvergenceRecord::Row row;
    row.k = state.k;
    row.data_misfit = res.data;
    row.pde_misfit = res.pde;
    if (res.model_error >= 0.0) row.model_error = res.model_error;
    if (res.wavefield_error >= 0.0) row.wavefield_error = res.wavefield_error;
    row.pde_solves = state.pde_solve_count;
    if (options.record_timing) {
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    out.record.rows.push_back(row);
    if (options.on_iteration) options.on_iteration(row);

    out.stop = check_stop(state.k, res.pde, res.data_per_freq, criteria.k_max, delta, eps);
    if (out.stop != StopDecision::kContinue) break;
  }
  out.model = state.m;
  out.delta_used = delta;
  out.final_state = std::move(state);
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

}  // namespace

RunResult run_inversion(const SlownessSqModel& model0, const ContinuationPlan& plan,
                        const InversionInputs& inputs, const PenaltyParams& params,
                        const StoppingCriteria& criteria, const LambdaPolicy& lambda_policy,
                        const BatchOptions& options) {
  plan.validate();
  if (!inputs.geometry || !inputs.dataset) throw ConfigError("inversion needs geometry and dataset");
  RunResult result;
  result.model = model0;
  auto& meta = result.metadata;
  meta.emplace_back("variant", to_string(params.variant));
  meta.emplace_back("alpha", fmt(params.alpha));
  meta.emplace_back("inner_iterations", std::to_string(params.inner_iterations));
  meta.emplace_back("lambda_fraction", fmt(lambda_policy.fraction));
  meta.emplace_back("mu1_seed", std::to_string(lambda_policy.seed));
  meta.emplace_back("mu1_tolerance", fmt(lambda_policy.mu1_tol));
  meta.emplace_back("regularization_shift", fmt(params.regularization));
  meta.emplace_back("bregman_weight", fmt(params.bregman_weight));
  meta.emplace_back("lambda_scope", "per-frequency, recomputed at each batch start from the current model");
  meta.emplace_back("dual_reset_per_batch", options.reset_duals ? "true" : "false");

  const std::vector<std::size_t> paths = plan.paths.empty() ? std::vector<std::size_t>{0} : plan.paths;
  long total_iterations = 0;
  std::optional<IterationState> carried;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    long path_iterations = 0;
    for (std::size_t b = paths[p]; b < plan.batches.size(); ++b) {
      const auto& batch = plan.batches[b];
      std::vector<double> lambdas;
      for (double f : batch) {
        double lambda = 0.0;
        if (auto it = lambda_policy.fixed.find(f); it != lambda_policy.fixed.end()) {
          lambda = it->second;
        } else {
          const auto mu1 = estimate_mu1(result.model, *inputs.geometry, f, inputs.setup, lambda_policy);
          lambda = compute_lambda(mu1.value, lambda_policy.fraction);
          const std::string key = "path" + std::to_string(p) + ".batch" + std::to_string(b) + ".f" + fmt(f);
          meta.emplace_back(key + ".mu1", fmt(mu1.value));
          meta.emplace_back(key + ".mu1_converged", mu1.converged ? "true" : "false");
        }
        lambdas.push_back(lambda);
      }
      meta.emplace_back("path" + std::to_string(p) + ".batch" + std::to_string(b) + ".frequencies", join(batch));
      meta.emplace_back("path" + std::to_string(p) + ".batch" + std::to_string(b) + ".lambda", join(lambdas));

      WriProblem problem(model0.grid, *inputs.geometry, *inputs.dataset, batch, lambdas, inputs.setup,
                         inputs.bounds);
      if (inputs.truth) problem.set_truth(*inputs.truth);
      StoppingCriteria crit = criteria;
      if (!plan.k_max.empty()) crit.k_max = plan.k_max[b];
      if (!crit.eps_n.empty() && crit.eps_n.size() != batch.size()) {
        crit.eps_n.assign(batch.size(), crit.eps_n.front());
      }

      BatchResult br;
      try {
        br = run_batch(result.model.values, problem, params, crit, options,
                       carried ? &*carried : nullptr);
      } catch (const Error& e) {
        throw Error("path " + std::to_string(p) + ", batch " + std::to_string(b) + ": " + e.what());
      }
      br.record.label = "path" + std::to_string(p) + "_batch" + std::to_string(b);
      meta.emplace_back(br.record.label + ".iterations", std::to_string(br.record.rows.size()));
      meta.emplace_back(br.record.label + ".stop", to_string(br.stop));
      meta.emplace_back(br.record.label + ".delta", fmt(br.delta_used));
      path_iterations += static_cast<long>(br.record.rows.size());
      result.model.values = br.model;
      if (!options.reset_duals) carried = br.final_state;
      result.records.push_back(std::move(br.record));
    }
    meta.emplace_back("path" + std::to_string(p) + ".iterations", std::to_string(path_iterations));
    total_iterations += path_iterations;
  }
  meta.emplace_back("total_iterations", std::to_string(total_iterations));
  return result;
}

}  // namespace iwri
