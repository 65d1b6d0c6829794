#include "iwri/acquisition.hpp"

#include "iwri/errors.hpp"
#include "iwri/parallel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

namespace iwri {

void AcquisitionGeometry::validate(const Grid2D& grid) const {
  if (sources.empty()) throw GeometryError("acquisition has no sources");
  if (receivers.empty()) throw GeometryError("acquisition has no receivers");
  std::set<Index> source_cells;
  for (const auto& s : sources) source_cells.insert(grid.nearest_cell(s.x, s.z));
  for (const auto& r : receivers) {
    if (source_cells.count(grid.nearest_cell(r.x, r.z))) {
      throw GeometryError("receiver at (" + std::to_string(r.x) + ", " + std::to_string(r.z) +
                          ") shares a cell with a source");
    }
  }
}

SparseMatrix build_observation(const PaddedLayout& layout, const std::vector<Position>& receivers) {
  const Grid2D& g = layout.physical();
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(receivers.size());
  for (std::size_t r = 0; r < receivers.size(); ++r) {
    const Index cell = g.nearest_cell(receivers[r].x, receivers[r].z);
    t.emplace_back(static_cast<Index>(r), layout.padded_index(cell), Complex(1.0, 0.0));
  }
  SparseMatrix P(static_cast<Index>(receivers.size()), layout.padded().size());
  P.setFromTriplets(t.begin(), t.end());
  P.makeCompressed();
  return P;
}

CVector build_source(const PaddedLayout& layout, const Position& src, Complex amplitude) {
  const Grid2D& g = layout.physical();
  const Index cell = g.nearest_cell(src.x, src.z);
  CVector b = CVector::Zero(layout.padded().size());
  b[layout.padded_index(cell)] = amplitude / (g.dx * g.dz);
  return b;
}

double ricker_spectrum(double f, double f0) {
  if (f < 0.0 || !(f0 > 0.0)) throw ParameterError("ricker spectrum needs f >= 0 and f0 > 0");
  const double r = f / f0;
  return 2.0 / std::sqrt(std::numbers::pi) * f * f / (f0 * f0 * f0) * std::exp(-r * r);
}

std::shared_ptr<const HelmholtzStencil> ModelingSetup::stencil(const Grid2D& grid,
                                                               double freq_hz) const {
  return std::make_shared<const HelmholtzStencil>(grid, 2.0 * std::numbers::pi * freq_hz, pml,
                                                  scheme, pml_velocity);
}

void FrequencyDataset::validate() const {
  if (frequencies.empty()) throw ShapeError("dataset has no frequencies");
  for (std::size_t f = 1; f < frequencies.size(); ++f) {
    if (!(frequencies[f] > frequencies[f - 1])) throw ShapeError("frequencies must increase strictly");
  }
  if (data.size() != frequencies.size() || noise_level.size() != frequencies.size()) {
    throw ShapeError("dataset blocks do not match frequency count");
  }
  for (const auto& block : data) {
    if (static_cast<Index>(block.size()) != n_sources) throw ShapeError("dataset source count mismatch");
    for (const auto& d : block) {
      if (d.size() != n_receivers) throw ShapeError("dataset receiver count mismatch");
    }
  }
}

Index FrequencyDataset::frequency_index(double freq_hz) const {
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    if (std::abs(frequencies[f] - freq_hz) <= 1e-9 * std::max(1.0, freq_hz)) {
      return static_cast<Index>(f);
    }
  }
  throw ShapeError("frequency " + std::to_string(freq_hz) + " Hz is not in the dataset");
}

double FrequencyDataset::slice_norm(std::size_t f) const {
  double sq = 0.0;
  for (const auto& d : data[f]) sq += d.squaredNorm();
  return std::sqrt(sq);
}

FrequencyDataset synthesize_data(const SlownessSqModel& m_true, const AcquisitionGeometry& geometry,
                                 const std::vector<double>& frequencies, const ModelingSetup& setup) {
  geometry.validate(m_true.grid);
  if (!(m_true.values.array() > 0.0).all()) throw InvalidModelError("squared slowness must be positive");

  FrequencyDataset out;
  out.frequencies = frequencies;
  out.n_sources = static_cast<Index>(geometry.sources.size());
  out.n_receivers = static_cast<Index>(geometry.receivers.size());
  out.data.assign(frequencies.size(), std::vector<CVector>(geometry.sources.size()));
  out.noise_level.assign(frequencies.size(), kNoiselessLevel);
  out.snr_db = kNoNoise;
  if (frequencies.empty()) throw ShapeError("no frequencies requested");

  parallel_for(frequencies.size(), [&](std::size_t f) {
    const auto stencil = setup.stencil(m_true.grid, frequencies[f]);
    const auto& layout = stencil->layout();
    const SparseMatrix P = build_observation(layout, geometry.receivers);
    const auto lu = LuFactorization::factorize(stencil->assemble(layout.extend(m_true.values)));
    const double w = ricker_spectrum(frequencies[f], setup.ricker_f0);
    for (std::size_t s = 0; s < geometry.sources.size(); ++s) {
      out.data[f][s] = P * lu.solve(build_source(layout, geometry.sources[s], Complex(w, 0.0)));
    }
  });
  out.validate();
  return out;
}

FrequencyDataset add_noise(const FrequencyDataset& dataset, double snr_db, std::uint64_t seed) {
  if (dataset.frequencies.empty() || dataset.n_sources == 0 || dataset.n_receivers == 0) {
    throw ShapeError("cannot add noise to an empty dataset");
  }
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ParameterError("SNR must be finite or +inf");
  }
  FrequencyDataset out = dataset;
  out.seed = seed;
  out.snr_db = snr_db;
  if (std::isinf(snr_db)) {
    out.noise_level.assign(dataset.frequencies.size(), kNoiselessLevel);
    return out;
  }
  const double ratio = std::pow(10.0, snr_db / 20.0);
  for (std::size_t f = 0; f < dataset.frequencies.size(); ++f) {
    std::vector<CVector> noise(dataset.data[f].size());
    double noise_sq = 0.0;
    for (std::size_t s = 0; s < noise.size(); ++s) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        static_cast<std::uint32_t>(f), static_cast<std::uint32_t>(s)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> normal(0.0, 1.0);
      noise[s].resize(dataset.n_receivers);
      for (Index r = 0; r < dataset.n_receivers; ++r) {
        const double re = normal(rng);
        const double im = normal(rng);
        noise[s][r] = Complex(re, im);
      }
      noise_sq += noise[s].squaredNorm();
    }
    const double scale = dataset.slice_norm(f) / (ratio * std::sqrt(noise_sq));
    double added_sq = 0.0;
    for (std::size_t s = 0; s < noise.size(); ++s) {
      noise[s] *= scale;
      added_sq += noise[s].squaredNorm();
      out.data[f][s] += noise[s];
    }
    out.noise_level[f] = std::sqrt(added_sq);
  }
  return out;
}

}  // namespace iwri
