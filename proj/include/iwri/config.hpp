#pragma once

#include "iwri/acquisition.hpp"
#include "iwri/grid.hpp"
#include "iwri/workflow.hpp"
#include "iwri/wri.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iwri {

/// How a model is obtained: a model file, or one of the built-in generators
/// driven by the grid/box/background keys.
struct ModelSource {
  std::string kind = "box";  // file | box | homogeneous | gradient | smooth
  std::string path;
};

/// Fully resolved run configuration. Every field has a default so that a
/// config file only lists what it changes.
struct RunConfig {
  Grid2D grid{100, 70, 10.0, 10.0};
  ModelSource true_model{"box", ""};
  ModelSource initial_model{"homogeneous", ""};
  double background_velocity = 1800.0;
  double gradient_bottom_velocity = 2500.0;
  double box_x0 = 450.0;
  double box_z0 = 300.0;
  double box_side = 100.0;
  double box_velocity = 2100.0;
  double smooth_corr_x = 100.0;
  double smooth_corr_z = 100.0;

  AcquisitionGeometry geometry;
  std::vector<double> frequencies{2.5, 5.0, 7.0};
  ContinuationPlan plan;
  std::string data_file;  // empty: synthesize from the true model

  PenaltyParams penalty;
  LambdaPolicy lambda;
  StoppingCriteria stopping;
  std::optional<Bounds> bounds;
  ModelingSetup setup;

  double snr_db = kNoNoise;
  std::uint64_t seed = 1;
  bool reset_duals = true;
  bool record_timing = false;
  std::string output_dir = "out";

  std::string source_path;  // config file this was loaded from, if any

  void validate() const;
};

RunConfig default_run_config();

/// Parses `key = value` lines (with `#` comments) on top of the defaults.
/// Relative paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Every key with its resolved value, in a stable order; feeding the result
/// back through parse_config reproduces the configuration.
std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& cfg);
std::string to_config_text(const RunConfig& cfg);

/// Builds the configured true and starting models.
VelocityModel build_true_model(const RunConfig& cfg);
VelocityModel build_initial_model(const RunConfig& cfg);

}  // namespace iwri
