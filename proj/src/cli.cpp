#include "iwri/cli.hpp"

#include "iwri/config.hpp"
#include "iwri/errors.hpp"
#include "iwri/io.hpp"
#include "iwri/parallel.hpp"
#include "iwri/refinement.hpp"
#include "iwri/workflow.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <filesystem>
#include <iostream>
#include <random>

namespace iwri {

namespace {

struct Overrides {
  std::optional<std::string> variant;
  std::optional<double> lambda_fraction;
  std::optional<double> alpha;
  std::optional<int> inner_n;
  std::optional<double> snr_db;
  std::optional<std::uint64_t> seed;
};

void apply(const Overrides& o, RunConfig& cfg) {
  try {
    if (o.variant) cfg.penalty.variant = parse_variant(*o.variant);
    if (o.lambda_fraction) cfg.lambda.fraction = *o.lambda_fraction;
    if (o.alpha) cfg.penalty.alpha = *o.alpha;
    if (o.inner_n) cfg.penalty.inner_iterations = *o.inner_n;
    if (o.snr_db) cfg.snr_db = *o.snr_db;
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

// Observed data: read from the configured file, or synthesized from the true
// model with optional noise.
FrequencyDataset observed_data(const RunConfig& cfg) {
  if (!cfg.data_file.empty()) return read_dataset_file(cfg.data_file);
  const auto m_true = velocity_to_slowness_sq(build_true_model(cfg));
  const auto clean = synthesize_data(m_true, cfg.geometry, cfg.frequencies, cfg.setup);
  return add_noise(clean, cfg.snr_db, cfg.seed);
}

std::vector<std::pair<std::string, std::string>> base_metadata(const RunConfig& cfg, const std::string& command) {
  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("command", command);
  for (auto& e : resolved_entries(cfg)) meta.emplace_back("config." + e.first, e.second);
  meta.emplace_back("snr_convention", "20*log10(|d|_F / |noise|_F) per frequency");
  return meta;
}

void dataset_metadata(const FrequencyDataset& data, std::vector<std::pair<std::string, std::string>>& meta) {
  for (std::size_t f = 0; f < data.frequencies.size(); ++f) {
    meta.emplace_back("data.f" + format_double(data.frequencies[f]) + ".eps_n", format_double(data.noise_level[f]));
  }
  meta.emplace_back("data.seed", data.seed ? std::to_string(*data.seed) : "none");
}

int run_forward(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const auto dir = prepare_dir(out_dir);
  const VelocityModel v_true = build_true_model(cfg);
  const auto clean = synthesize_data(velocity_to_slowness_sq(v_true), cfg.geometry, cfg.frequencies, cfg.setup);
  const auto data = add_noise(clean, cfg.snr_db, cfg.seed);
  write_dataset_file(data, (dir / "data.iwd").string());
  write_model_file(v_true, (dir / "true_model.iwm").string());
  write_raster(v_true.values, v_true.grid.nx, v_true.grid.nz, (dir / "true_model.pgm").string());
  auto meta = base_metadata(cfg, "forward");
  dataset_metadata(data, meta);
  write_metadata(meta, (dir / "metadata.txt").string());
  out << "wrote " << (dir / "data.iwd").string() << " (" << data.frequencies.size() << " frequencies, "
      << data.n_sources << " sources, " << data.n_receivers << " receivers)\n";
  return kExitOk;
}

InversionInputs inversion_inputs(const RunConfig& cfg, const FrequencyDataset& data, const AcquisitionGeometry& geometry) {
  InversionInputs in;
  in.geometry = &geometry;
  in.dataset = &data;
  in.setup = cfg.setup;
  in.bounds = cfg.bounds;
  // diagnostics only; the inversion never sees the true model otherwise
  in.truth = velocity_to_slowness_sq(build_true_model(cfg));
  return in;
}

int run_invert(const RunConfig& cfg, const std::string& out_dir, std::ostream& out) {
  const auto dir = prepare_dir(out_dir);
  const auto data = observed_data(cfg);
  const auto inputs = inversion_inputs(cfg, data, cfg.geometry);
  const auto m0 = velocity_to_slowness_sq(build_initial_model(cfg));
  BatchOptions opts;
  opts.reset_duals = cfg.reset_duals;
  opts.record_timing = cfg.record_timing;
  const RunResult result = run_inversion(m0, cfg.plan, inputs, cfg.penalty, cfg.stopping, cfg.lambda, opts);

  const VelocityModel v_final = slowness_sq_to_velocity(result.model);
  write_model_file(v_final, (dir / "final_model.iwm").string());
  write_raster(v_final.values, v_final.grid.nx, v_final.grid.nz, (dir / "final_model.pgm").string());
  for (const auto& rec : result.records) {
    write_convergence_csv(rec, (dir / ("convergence_" + rec.label + ".csv")).string());
  }
  auto meta = base_metadata(cfg, "invert");
  dataset_metadata(data, meta);
  meta.insert(meta.end(), result.metadata.begin(), result.metadata.end());
  write_metadata(meta, (dir / "metadata.txt").string());

  for (const auto& rec : result.records) {
    if (rec.rows.empty()) continue;
    const auto& last = rec.rows.back();
    out << rec.label << ": " << rec.rows.size() << " iterations, data misfit " << format_double(last.data_misfit)
        << ", pde misfit " << format_double(last.pde_misfit);
    if (last.model_error) out << ", model error " << format_double(*last.model_error);
    out << "\n";
  }
  return kExitOk;
}

// Largest eigenvalue of (P A^{-1})^H (P A^{-1}) from a dense inverse.
double dense_mu1(const SlownessSqModel& m, const AcquisitionGeometry& geometry, double freq,
                 const ModelingSetup& setup) {
  const auto stencil = setup.stencil(m.grid, freq);
  const Index n = stencil->layout().padded().size();
  if (n > 1500) {
    throw ConfigError("--dense-check needs a grid with at most 1500 padded unknowns, this one has " +
                      std::to_string(n));
  }
  const Eigen::MatrixXcd A = Eigen::MatrixXcd(stencil->assemble(stencil->layout().extend(m.values)));
  const Eigen::MatrixXcd P = Eigen::MatrixXcd(build_observation(stencil->layout(), geometry.receivers));
  const Eigen::MatrixXcd G = P * A.partialPivLu().inverse();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G.adjoint() * G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

int run_mu1(const RunConfig& cfg, double freq, bool dense_check, const std::string& which, std::ostream& out) {
  const VelocityModel v = which == "true" ? build_true_model(cfg) : build_initial_model(cfg);
  const auto m = velocity_to_slowness_sq(v);
  const Mu1Estimate est = estimate_mu1(m, cfg.geometry, freq, cfg.setup, cfg.lambda);
  out << "mu1 = " << format_double(est.value) << " (" << est.iterations << " iterations"
      << (est.converged ? "" : ", not converged") << ")\n";
  if (dense_check) {
    const double dense = dense_mu1(m, cfg.geometry, freq, cfg.setup);
    out << "mu1_dense = " << format_double(dense) << "\n";
    out << "relative_difference = " << format_double(std::abs(est.value - dense) / dense) << "\n";
  }
  return kExitOk;
}

int run_scan(RunConfig cfg, const std::vector<double>& fractions, const std::string& out_dir, std::ostream& out) {
  if (fractions.empty()) throw ConfigError("--fractions needs at least one value");
  const auto dir = prepare_dir(out_dir);
  const auto data = observed_data(cfg);
  const auto inputs = inversion_inputs(cfg, data, cfg.geometry);
  const auto m0 = velocity_to_slowness_sq(build_initial_model(cfg));
  // one record per fraction: the sweep runs the first batch only
  ContinuationPlan plan;
  plan.batches = {cfg.plan.batches.front()};
  if (!cfg.plan.k_max.empty()) plan.k_max = {cfg.plan.k_max.front()};
  auto meta = base_metadata(cfg, "scan-lambda");
  dataset_metadata(data, meta);
  BatchOptions opts;
  opts.record_timing = cfg.record_timing;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    LambdaPolicy policy = cfg.lambda;
    policy.fraction = fractions[i];
    policy.fixed.clear();
    const RunResult r = run_inversion(m0, plan, inputs, cfg.penalty, cfg.stopping, policy, opts);
    const auto& rec = r.records.front();
    const std::string name = "scan_" + std::to_string(i) + ".csv";
    write_convergence_csv(rec, (dir / name).string());
    meta.emplace_back("scan." + std::to_string(i) + ".fraction", format_double(fractions[i]));
    meta.emplace_back("scan." + std::to_string(i) + ".file", name);
    for (const auto& [k, v] : r.metadata) {
      if (k.find(".lambda") != std::string::npos || k.find(".mu1") != std::string::npos) {
        meta.emplace_back("scan." + std::to_string(i) + "." + k, v);
      }
    }
    const auto& last = rec.rows.back();
    out << "fraction " << format_double(fractions[i]) << ": " << rec.rows.size() << " iterations, pde misfit "
        << format_double(last.pde_misfit) << ", data misfit " << format_double(last.data_misfit);
    if (last.model_error) out << ", model error " << format_double(*last.model_error);
    out << "\n";
  }
  write_metadata(meta, (dir / "metadata.txt").string());
  return kExitOk;
}

int run_oracle_refine(int n, double beta, int k, std::uint64_t seed, std::ostream& out) {
  if (n < 1) throw ConfigError("--n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseProblem<Complex> p;
  p.A.resize(n, n);
  p.b.resize(n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) p.A(i, j) = Complex(g(rng), g(rng));
  }
  for (Index i = 0; i < n; ++i) p.b[i] = Complex(g(rng), g(rng));
  p.beta = beta;
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto xs = iterative_refine_history(p, k);
  const auto xp = refine_by_perturbation(p, k);
  out << "k,residual_norm\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << (i + 1) << "," << format_double((p.A * xs[i] - p.b).norm()) << "\n";
  }
  out << "form_difference = " << format_double((xs.back() - xp).norm() / std::max(xp.norm(), 1e-300)) << "\n";
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-domain wavefield-reconstruction inversion"};
  app.require_subcommand(1);
  Overrides ov;

  std::string config, out_dir;
  auto* forward = app.add_subcommand("forward", "Synthesize observed data from the true model");
  forward->add_option("--config", config, "Run configuration file")->required();
  forward->add_option("--out", out_dir, "Output directory");
  forward->add_option("--snr-db", ov.snr_db, "SNR of added noise in dB (inf = none)");
  forward->add_option("--seed", ov.seed, "Noise seed");

  auto* invert = app.add_subcommand("invert", "Run an inversion");
  invert->add_option("--config", config, "Run configuration file")->required();
  invert->add_option("--out", out_dir, "Output directory");
  invert->add_option("--variant", ov.variant, "wri, admm or prsm (irwri is an alias of prsm)");
  invert->add_option("--lambda-fraction", ov.lambda_fraction, "lambda as a fraction of mu1");
  invert->add_option("--alpha", ov.alpha, "PRSM relaxation in (0, 1]");
  invert->add_option("--inner-n", ov.inner_n, "Inner iterations per cycle");
  invert->add_option("--snr-db", ov.snr_db, "SNR of added noise in dB (inf = none)");
  invert->add_option("--seed", ov.seed, "Noise seed");

  double freq = 0.0;
  bool dense_check = false;
  std::string which = "initial";
  auto* mu1 = app.add_subcommand("mu1", "Largest eigenvalue of A^-H P^H P A^-1 by power iteration");
  mu1->add_option("--config", config, "Run configuration file")->required();
  mu1->add_option("--freq", freq, "Frequency in Hz")->required();
  mu1->add_flag("--dense-check", dense_check, "Compare with a dense eigendecomposition");
  mu1->add_option("--model", which, "Model to evaluate: initial or true")->check(CLI::IsMember({"initial", "true"}));

  std::vector<double> fractions;
  auto* scan = app.add_subcommand("scan-lambda", "Convergence record per lambda fraction");
  scan->add_option("--config", config, "Run configuration file")->required();
  scan->add_option("--fractions", fractions, "Comma-separated lambda fractions")->required()->delimiter(',');
  scan->add_option("--out", out_dir, "Output directory");
  scan->add_option("--variant", ov.variant, "wri, admm or prsm");
  scan->add_option("--alpha", ov.alpha, "PRSM relaxation in (0, 1]");

  int n = 8, k = 5;
  double beta = 0.1;
  std::uint64_t seed = 7;
  auto* oracle = app.add_subcommand("oracle-refine", "Iterative refinement of a random dense system");
  oracle->add_option("--n", n, "Dimension");
  oracle->add_option("--beta", beta, "Damping");
  oracle->add_option("--k", k, "Iterations");
  oracle->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*oracle) return run_oracle_refine(n, beta, k, seed, out);
    RunConfig cfg = load_config(config);
    apply(ov, cfg);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (*forward) return run_forward(cfg, out_dir, out);
    if (*invert) return run_invert(cfg, out_dir, out);
    if (*mu1) return run_mu1(cfg, freq, dense_check, which, out);
    if (*scan) return run_scan(cfg, fractions, out_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const GeometryError& e) {
    err << "geometry error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int cli_dispatch(int argc, const char* const* argv) { return cli_dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace iwri
