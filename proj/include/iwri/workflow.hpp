#pragma once

#include "iwri/wri.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iwri {

/// Per-iteration diagnostics of one batch.
struct ConvergenceRecord {
  struct Row {
    int k = 0;
    double data_misfit = 0.0;
    double pde_misfit = 0.0;
    std::optional<double> model_error;
    std::optional<double> wavefield_error;
    long pde_solves = 0;
    std::optional<double> wall_seconds;
  };
  std::string label;
  std::vector<Row> rows;

  /// First iteration whose wave-equation misfit is <= threshold, if any.
  std::optional<int> first_below_pde(double threshold) const;
};

struct ContinuationPlan {
  std::vector<std::vector<double>> batches;  // frequency sets in Hz
  std::vector<std::size_t> paths = {0};      // starting batch index per path; empty = {0}
  std::vector<int> k_max;                    // per batch; empty = criteria.k_max

  void validate() const;
  /// One batch per frequency.
  static ContinuationPlan singletons(const std::vector<double>& freqs);
  /// Overlapping batches of `size` frequencies sharing `overlap` with the next.
  static ContinuationPlan sliding(const std::vector<double>& freqs, std::size_t size,
                                  std::size_t overlap);
};

struct StoppingCriteria {
  int k_max = 10;
  double delta = 1e-3;
  /// When set, delta is replaced by this fraction of the first iteration's
  /// wave-equation misfit.
  std::optional<double> delta_relative;
  /// Per-frequency data thresholds; empty means the dataset noise levels.
  std::vector<double> eps_n;

  void validate() const;
};

enum class StopDecision { kContinue, kStopKmax, kStopConverged };

std::string to_string(StopDecision d);

/// k >= k_max, or (|A u - b|_F <= delta and |P u - d|_F <= eps_n for every
/// frequency).
StopDecision check_stop(int k, double pde_residual, const std::vector<double>& data_residuals,
                        int k_max, double delta, const std::vector<double>& eps_n);

double compute_lambda(double mu1, double fraction);

/// lambda_f = fraction * mu1(omega_f) unless fixed values are supplied.
struct LambdaPolicy {
  double fraction = 1e-4;
  std::map<double, double> fixed;  // Hz -> lambda
  double mu1_tol = 1e-4;
  int mu1_max_it = 500;
  std::uint64_t seed = 20180701;
};

/// mu1 of A(m)^{-H} P^H P A(m)^{-1} at one frequency.
Mu1Estimate estimate_mu1(const SlownessSqModel& m, const AcquisitionGeometry& geometry,
                         double freq_hz, const ModelingSetup& setup, const LambdaPolicy& policy);

struct BatchOptions {
  bool reset_duals = true;
  bool record_timing = false;
  std::function<void(const ConvergenceRecord::Row&)> on_iteration;
};

struct BatchResult {
  RVector model;
  ConvergenceRecord record;
  StopDecision stop = StopDecision::kContinue;
  double delta_used = 0.0;
  IterationState final_state;
};

/// Iterates cycles (with params.inner_iterations inner steps) until check_stop
/// fires. `state0` carries duals across batches when reset is disabled.
BatchResult run_batch(const RVector& model_in, const WriProblem& problem, const PenaltyParams& params,
                      const StoppingCriteria& criteria, const BatchOptions& options = {},
                      const IterationState* state0 = nullptr);

struct RunResult {
  SlownessSqModel model;
  std::vector<ConvergenceRecord> records;
  std::vector<std::pair<std::string, std::string>> metadata;
};

struct InversionInputs {
  const AcquisitionGeometry* geometry = nullptr;
  const FrequencyDataset* dataset = nullptr;
  ModelingSetup setup;
  std::optional<Bounds> bounds;
  std::optional<SlownessSqModel> truth;
};

/// Runs every path of the plan in order, threading the model from batch to
/// batch; lambda (and mu1) is recomputed at the start of each batch from the
/// current model.
RunResult run_inversion(const SlownessSqModel& model0, const ContinuationPlan& plan,
                        const InversionInputs& inputs, const PenaltyParams& params,
                        const StoppingCriteria& criteria, const LambdaPolicy& lambda_policy,
                        const BatchOptions& options = {});

}  // namespace iwri
