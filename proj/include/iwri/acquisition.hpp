#pragma once

#include "iwri/helmholtz.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace iwri {

struct Position {
  double x = 0.0;
  double z = 0.0;
};

struct AcquisitionGeometry {
  std::vector<Position> sources;
  std::vector<Position> receivers;

  /// Non-empty lists, every position inside the grid, and no receiver in a
  /// source cell.
  void validate(const Grid2D& grid) const;
};

/// M x N_pad nearest-cell sampling matrix P.
SparseMatrix build_observation(const PaddedLayout& layout, const std::vector<Position>& receivers);

/// amplitude / (dx dz) at the padded cell nearest to the source.
CVector build_source(const PaddedLayout& layout, const Position& src, Complex amplitude);

/// Zero-phase Ricker amplitude spectrum (2/sqrt(pi)) f^2/f0^3 exp(-(f/f0)^2).
double ricker_spectrum(double f, double f0);

/// Everything needed to build A(m) apart from the model and frequency.
struct ModelingSetup {
  PmlConfig pml;
  StencilScheme scheme = StencilScheme::nine_point();
  double ricker_f0 = 5.0;
  /// Velocity used to size automatic PML damping; must be identical between
  /// data synthesis and inversion.
  double pml_velocity = 2000.0;

  std::shared_ptr<const HelmholtzStencil> stencil(const Grid2D& grid, double freq_hz) const;
};

struct FrequencyDataset {
  std::vector<double> frequencies;  // Hz, strictly increasing
  Index n_sources = 0;
  Index n_receivers = 0;
  /// data[f][s] is the length-M record of source s at frequency f.
  std::vector<std::vector<CVector>> data;
  /// Per-frequency data-misfit threshold (noise Frobenius norm).
  std::vector<double> noise_level;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;

  void validate() const;
  Index frequency_index(double freq_hz) const;
  double slice_norm(std::size_t f) const;
};

inline constexpr double kNoiselessLevel = 1e-5;
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// d = P A(m_true)^{-1} (W(f) b) for every (frequency, source).
FrequencyDataset synthesize_data(const SlownessSqModel& m_true, const AcquisitionGeometry& geometry,
                                 const std::vector<double>& frequencies, const ModelingSetup& setup);

/// Adds complex Gaussian noise so every frequency slice has a Frobenius SNR
/// of exactly snr_db (20 log10 amplitude ratio). snr_db = +inf leaves the data
/// untouched and sets the noiseless threshold.
FrequencyDataset add_noise(const FrequencyDataset& dataset, double snr_db, std::uint64_t seed);

}  // namespace iwri
