#include "iwri/grid.hpp"

#include "iwri/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace iwri {

Grid2D::Grid2D(Index nx_, Index nz_, double dx_, double dz_) : nx(nx_), nz(nz_), dx(dx_), dz(dz_) {
  if (nx < 3 || nz < 3) {
    throw GeometryError("grid needs at least 3x3 cells, got " + std::to_string(nx) + "x" +
                        std::to_string(nz));
  }
  if (!(dx > 0.0) || !(dz > 0.0) || !std::isfinite(dx) || !std::isfinite(dz)) {
    throw GeometryError("grid spacing must be positive and finite");
  }
}

bool Grid2D::contains(double x_, double z_) const {
  const double tol_x = 0.5 * dx;
  const double tol_z = 0.5 * dz;
  return x_ >= -tol_x && x_ < width() + tol_x && z_ >= -tol_z && z_ < depth() + tol_z;
}

Index Grid2D::nearest_cell(double x_, double z_) const {
  if (!std::isfinite(x_) || !std::isfinite(z_) || !contains(x_, z_)) {
    throw GeometryError("position (" + std::to_string(x_) + ", " + std::to_string(z_) +
                        ") lies outside the grid");
  }
  const auto ix = std::clamp<Index>(static_cast<Index>(std::lround(x_ / dx)), 0, nx - 1);
  const auto iz = std::clamp<Index>(static_cast<Index>(std::lround(z_ / dz)), 0, nz - 1);
  return index(ix, iz);
}

Bounds::Bounds(double lo, double hi) : v_min(lo), v_max(hi) {
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw ParameterError("bounds need 0 < v_min < v_max");
  }
}

namespace {

void check_size(const Grid2D& grid, const Eigen::VectorXd& values) {
  if (values.size() != grid.size()) {
    throw ShapeError("model has " + std::to_string(values.size()) + " values for a grid of " +
                     std::to_string(grid.size()) + " cells");
  }
}

void check_positive(const Eigen::VectorXd& values, const char* what) {
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !(values[i] > 0.0)) {
      throw InvalidModelError(std::string(what) + " at cell " + std::to_string(i) +
                              " is not strictly positive and finite");
    }
  }
}

// Whole-sample symmetric reflection into [0, n): -1 -> 0, n -> n-1.
Index reflect(Index i, Index n) {
  const Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma_cells) {
  const auto half = static_cast<Index>(std::ceil(4.0 * sigma_cells));
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (Index k = -half; k <= half; ++k) {
    const double kk = static_cast<double>(k);
    const double v = std::exp(-0.5 * kk * kk / (sigma_cells * sigma_cells));
    w[static_cast<std::size_t>(k + half)] = v;
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

// One-dimensional pass along x (stride 1) or z (stride nx).
Eigen::VectorXd smooth_axis(const Grid2D& g, const Eigen::VectorXd& in, double sigma_cells,
                            bool along_x) {
  if (sigma_cells <= 0.0) return in;
  const auto w = gaussian_kernel(sigma_cells);
  const auto half = static_cast<Index>(w.size() / 2);
  Eigen::VectorXd out(in.size());
  for (Index iz = 0; iz < g.nz; ++iz) {
    for (Index ix = 0; ix < g.nx; ++ix) {
      double acc = 0.0;
      for (Index k = -half; k <= half; ++k) {
        const Index src = along_x ? g.index(reflect(ix + k, g.nx), iz)
                                  : g.index(ix, reflect(iz + k, g.nz));
        acc += w[static_cast<std::size_t>(k + half)] * in[src];
      }
      out[g.index(ix, iz)] = acc;
    }
  }
  return out;
}

}  // namespace

SlownessSqModel velocity_to_slowness_sq(const VelocityModel& v) {
  check_size(v.grid, v.values);
  check_positive(v.values, "velocity");
  return {v.grid, v.values.array().square().inverse().matrix()};
}

VelocityModel slowness_sq_to_velocity(const SlownessSqModel& m) {
  check_size(m.grid, m.values);
  check_positive(m.values, "squared slowness");
  return {m.grid, m.values.array().rsqrt().matrix()};
}

VelocityModel build_homogeneous(const Grid2D& grid, double v0) {
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw InvalidModelError("velocity must be positive");
  return {grid, Eigen::VectorXd::Constant(grid.size(), v0)};
}

VelocityModel embed_box(const VelocityModel& background, double x0, double z0, double side,
                        double v_box) {
  const Grid2D& g = background.grid;
  check_size(g, background.values);
  if (!(v_box > 0.0) || !std::isfinite(v_box)) throw InvalidModelError("box velocity must be positive");
  if (side < 0.0) throw GeometryError("box side must be nonnegative");
  VelocityModel out = background;
  if (side == 0.0) return out;
  if (!g.contains(x0, z0) || !g.contains(x0 + side, z0 + side)) {
    throw GeometryError("box lies outside the grid");
  }
  for (Index iz = 0; iz < g.nz; ++iz) {
    const double z = g.z(iz);
    if (z < z0 || z >= z0 + side) continue;
    for (Index ix = 0; ix < g.nx; ++ix) {
      const double x = g.x(ix);
      if (x >= x0 && x < x0 + side) out.values[g.index(ix, iz)] = v_box;
    }
  }
  return out;
}

VelocityModel build_linear_gradient(const Grid2D& grid, double v_top, double v_bottom) {
  if (!(v_top > 0.0) || !(v_bottom > 0.0)) throw InvalidModelError("velocities must be positive");
  VelocityModel out{grid, Eigen::VectorXd(grid.size())};
  for (Index iz = 0; iz < grid.nz; ++iz) {
    const double t = static_cast<double>(iz) / static_cast<double>(grid.nz - 1);
    const double v = iz == grid.nz - 1 ? v_bottom : v_top + (v_bottom - v_top) * t;
    out.values.segment(iz * grid.nx, grid.nx).setConstant(v);
  }
  return out;
}

VelocityModel gaussian_smooth(const VelocityModel& model, double corr_x, double corr_z) {
  check_size(model.grid, model.values);
  if (corr_x < 0.0 || corr_z < 0.0) throw ParameterError("correlation lengths must be >= 0");
  const Grid2D& g = model.grid;
  VelocityModel out = model;
  out.values = smooth_axis(g, out.values, corr_x / g.dx, true);
  out.values = smooth_axis(g, out.values, corr_z / g.dz, false);
  return out;
}

}  // namespace iwri
