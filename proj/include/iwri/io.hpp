#pragma once

#include "iwri/acquisition.hpp"
#include "iwri/grid.hpp"
#include "iwri/workflow.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace iwri {

inline constexpr const char* kModelMagic = "IWRI-MODEL-1";
inline constexpr const char* kDataMagic = "IWRI-DATA-1";

// Model file: five text lines (magic, nx, nz, dx, dz) then nx*nz little-endian
// float32 velocities, x fastest.
void write_model_file(const VelocityModel& model, const std::string& path);
VelocityModel read_model_file(const std::string& path);
std::string encode_model(const VelocityModel& model);
VelocityModel decode_model(const std::string& bytes);

// Dataset file: text header terminated by "end", then per frequency the
// (re, im) float64 pairs, source-major and receiver-minor.
void write_dataset_file(const FrequencyDataset& data, const std::string& path);
FrequencyDataset read_dataset_file(const std::string& path);
std::string encode_dataset(const FrequencyDataset& data);
FrequencyDataset decode_dataset(const std::string& bytes);

inline constexpr const char* kConvergenceHeader =
    "k,data_misfit,pde_misfit,model_error,wavefield_error,pde_solves,wall_seconds";

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path);
void write_convergence_csv(const ConvergenceRecord& record, std::ostream& os);
ConvergenceRecord read_convergence_csv(const std::string& path);
ConvergenceRecord parse_convergence_csv(std::istream& is);

struct RasterScaling {
  bool minmax = true;
  double lo = 0.0;
  double hi = 1.0;

  static RasterScaling min_max() { return {}; }
  static RasterScaling fixed(double lo, double hi) { return {false, lo, hi}; }
};

/// 8-bit P5 image with nz rows and nx columns.
std::string encode_raster(const Eigen::VectorXd& field, Index nx, Index nz, RasterScaling scaling);
void write_raster(const Eigen::VectorXd& field, Index nx, Index nz, const std::string& path,
                  RasterScaling scaling = RasterScaling::min_max());

void write_metadata(const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace iwri
