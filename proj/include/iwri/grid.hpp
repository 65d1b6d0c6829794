#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace iwri {

using Index = Eigen::Index;

/// Regular 2D grid. Cell (ix, iz) sits at x = ix*dx, z = iz*dz and is stored
/// at linear index iz*nx + ix (x fastest).
struct Grid2D {
  Index nx = 0;
  Index nz = 0;
  double dx = 0.0;
  double dz = 0.0;

  Grid2D() = default;
  Grid2D(Index nx, Index nz, double dx, double dz);

  Index size() const { return nx * nz; }
  Index index(Index ix, Index iz) const { return iz * nx + ix; }
  double x(Index ix) const { return static_cast<double>(ix) * dx; }
  double z(Index iz) const { return static_cast<double>(iz) * dz; }
  double width() const { return static_cast<double>(nx - 1) * dx; }
  double depth() const { return static_cast<double>(nz - 1) * dz; }

  /// Nearest cell to a physical position; throws GeometryError outside the grid.
  Index nearest_cell(double x, double z) const;
  bool contains(double x, double z) const;

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Squared slowness in s^2/m^2, the optimization variable.
struct SlownessSqModel {
  Grid2D grid;
  Eigen::VectorXd values;
};

/// Velocity in m/s, the I/O and display parametrization.
struct VelocityModel {
  Grid2D grid;
  Eigen::VectorXd values;
};

struct Bounds {
  double v_min = 0.0;
  double v_max = 0.0;

  Bounds() = default;
  Bounds(double v_min, double v_max);

  /// Squared-slowness interval [1/v_max^2, 1/v_min^2].
  double m_lo() const { return 1.0 / (v_max * v_max); }
  double m_hi() const { return 1.0 / (v_min * v_min); }
};

SlownessSqModel velocity_to_slowness_sq(const VelocityModel& v);
VelocityModel slowness_sq_to_velocity(const SlownessSqModel& m);

VelocityModel build_homogeneous(const Grid2D& grid, double v0);

/// Sets cells with x0 <= x < x0+side and z0 <= z < z0+side to v_box.
VelocityModel embed_box(const VelocityModel& background, double x0, double z0, double side,
                        double v_box);

/// v(z) = v_top + (v_bottom - v_top) * z / depth, constant along x.
VelocityModel build_linear_gradient(const Grid2D& grid, double v_top, double v_bottom);

/// Separable Gaussian smoothing with standard deviations in meters. Edges use
/// whole-sample mirror reflection, which keeps the operator symmetric and
/// doubly stochastic: the mean, the range and constant fields are preserved.
VelocityModel gaussian_smooth(const VelocityModel& model, double corr_x, double corr_z);

}  // namespace iwri
