#include "iwri/helmholtz.hpp"

#include "iwri/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace iwri {

void PmlConfig::validate() const {
  if (n_layers < 0) throw ParameterError("PML layer count must be >= 0");
  if (max_damping && !(*max_damping >= 0.0)) throw ParameterError("PML damping must be >= 0");
  if (!(profile_exponent > 0.0)) throw ParameterError("PML profile exponent must be positive");
  if (!(target_reflection > 0.0 && target_reflection < 1.0)) {
    throw ParameterError("PML target reflection must lie in (0, 1)");
  }
}

double PmlConfig::resolved_damping(double thickness, double v_ref) const {
  if (max_damping) return *max_damping;
  if (thickness <= 0.0) return 0.0;
  // Round trip through sigma(d) = s_max (d/L)^p attenuates by
  // exp(-2 s_max L / ((p+1) v)).
  return (profile_exponent + 1.0) * v_ref * std::log(1.0 / target_reflection) / (2.0 * thickness);
}

StencilScheme StencilScheme::nine_point() { return {}; }

StencilScheme StencilScheme::five_point() { return {1.0, 1.0, 0.0, 0.0}; }

StencilScheme StencilScheme::nine_point_lumped() {
  StencilScheme s;
  s.mass_center = 1.0;
  s.mass_edge = 0.0;
  s.mass_corner = 0.0;
  return s;
}

void StencilScheme::validate() const {
  if (!(laplacian_weight >= 0.0 && laplacian_weight <= 1.0)) {
    throw ParameterError("laplacian weight must lie in [0, 1]");
  }
  const double sum = mass_center + 4.0 * mass_edge + 4.0 * mass_corner;
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ParameterError("mass spreading weights must sum to 1, got " + std::to_string(sum));
  }
}

PaddedLayout::PaddedLayout(const Grid2D& physical, const PmlConfig& pml) : physical_(physical) {
  pml.validate();
  left_ = pml.left ? pml.n_layers : 0;
  right_ = pml.right ? pml.n_layers : 0;
  top_ = pml.top ? pml.n_layers : 0;
  bottom_ = pml.bottom ? pml.n_layers : 0;
  padded_ = Grid2D(physical.nx + left_ + right_, physical.nz + top_ + bottom_, physical.dx,
                   physical.dz);
}

Index PaddedLayout::padded_index(Index physical_linear) const {
  return padded_index(physical_linear % physical_.nx, physical_linear / physical_.nx);
}

RVector PaddedLayout::extend(const RVector& values) const {
  if (values.size() != physical_.size()) throw ShapeError("extend expects a physical-grid field");
  RVector out(padded_.size());
  for (Index jz = 0; jz < padded_.nz; ++jz) {
    const Index iz = std::clamp<Index>(jz - top_, 0, physical_.nz - 1);
    for (Index jx = 0; jx < padded_.nx; ++jx) {
      const Index ix = std::clamp<Index>(jx - left_, 0, physical_.nx - 1);
      out[padded_.index(jx, jz)] = values[physical_.index(ix, iz)];
    }
  }
  return out;
}

Eigen::SparseMatrix<double> PaddedLayout::extension_matrix() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(padded_.size()));
  for (Index jz = 0; jz < padded_.nz; ++jz) {
    const Index iz = std::clamp<Index>(jz - top_, 0, physical_.nz - 1);
    for (Index jx = 0; jx < padded_.nx; ++jx) {
      const Index ix = std::clamp<Index>(jx - left_, 0, physical_.nx - 1);
      t.emplace_back(padded_.index(jx, jz), physical_.index(ix, iz), 1.0);
    }
  }
  Eigen::SparseMatrix<double> E(padded_.size(), physical_.size());
  E.setFromTriplets(t.begin(), t.end());
  return E;
}

CVector PaddedLayout::restrict_to_physical(const CVector& u) const {
  if (u.size() != padded_.size()) throw ShapeError("restrict expects a padded-grid field");
  CVector out(physical_.size());
  for (Index i = 0; i < physical_.size(); ++i) out[i] = u[padded_index(i)];
  return out;
}

namespace {

// Complex stretching factor s = 1 + i sigma/omega at fractional padded
// coordinate `pos` along one axis.
struct AxisStretch {
  Index low_layers = 0;   // layers before the physical cells
  Index high_layers = 0;  // layers after
  Index n_physical = 0;
  double spacing = 1.0;
  double sigma_low = 0.0;
  double sigma_high = 0.0;
  double exponent = 2.0;
  double omega = 1.0;

  Complex operator()(double pos) const {
    const double first = static_cast<double>(low_layers);
    const double last = static_cast<double>(low_layers + n_physical - 1);
    double sigma = 0.0;
    if (pos < first && low_layers > 0) {
      sigma = sigma_low * std::pow((first - pos) / static_cast<double>(low_layers), exponent);
    } else if (pos > last && high_layers > 0) {
      sigma = sigma_high * std::pow((pos - last) / static_cast<double>(high_layers), exponent);
    }
    return {1.0, sigma / omega};
  }
};

}  // namespace

HelmholtzStencil::HelmholtzStencil(const Grid2D& physical, double omega, const PmlConfig& pml,
                                   const StencilScheme& scheme, double v_ref)
    : layout_(physical, pml), omega_(omega), scheme_(scheme) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ParameterError("omega must be positive");
  if (!(v_ref > 0.0)) throw ParameterError("PML reference velocity must be positive");
  scheme.validate();
  const double a = scheme.laplacian_weight;
  const double dx = physical.dx;
  const double dz = physical.dz;
  if (a < 1.0 && std::abs(dx - dz) > 1e-12 * dx) {
    throw ParameterError("the rotated stencil needs dx == dz");
  }

  const Grid2D& g = layout_.padded();
  const double thick_x = static_cast<double>(pml.n_layers) * dx;
  const double thick_z = static_cast<double>(pml.n_layers) * dz;
  AxisStretch sx{layout_.left(), layout_.right(), physical.nx, dx,
                 pml.resolved_damping(thick_x, v_ref), pml.resolved_damping(thick_x, v_ref),
                 pml.profile_exponent, omega};
  AxisStretch sz{layout_.top(), layout_.bottom(), physical.nz, dz,
                 pml.resolved_damping(thick_z, v_ref), pml.resolved_damping(thick_z, v_ref),
                 pml.profile_exponent, omega};

  damping_.resize(g.size());
  std::vector<Eigen::Triplet<Complex>> lap;
  std::vector<Eigen::Triplet<Complex>> mass;
  lap.reserve(static_cast<std::size_t>(9 * g.size()));
  mass.reserve(static_cast<std::size_t>(9 * g.size()));

  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_dz2 = 1.0 / (dz * dz);
  const double inv_diag2 = 1.0 / (dx * dx + dz * dz);

  for (Index jz = 0; jz < g.nz; ++jz) {
    const double z = static_cast<double>(jz);
    for (Index jx = 0; jx < g.nx; ++jx) {
      const double x = static_cast<double>(jx);
      const Index row = g.index(jx, jz);
      damping_[row] = sx(x) * sz(z);
      Complex center(0.0, 0.0);

      auto couple = [&](Index nx_, Index nz_, Complex coeff) {
        center -= coeff;
        if (nx_ >= 0 && nx_ < g.nx && nz_ >= 0 && nz_ < g.nz) {
          lap.emplace_back(row, g.index(nx_, nz_), coeff);
        }
      };

      // The rotated part only sees the mean K = (Kx + Kz)/2 along the
      // diagonals; the anisotropic remainder (Kx - Kz)/2 (d_xx - d_zz), which
      // vanishes outside the PML, goes onto the axis neighbours.
      for (int sgn : {-1, 1}) {
        const double hx = x + 0.5 * sgn;
        const double hz = z + 0.5 * sgn;
        const Complex kx_at_x = sz(z) / sx(hx), kz_at_x = sx(hx) / sz(z);
        const Complex kz_at_z = sx(x) / sz(hz), kx_at_z = sz(hz) / sx(x);
        couple(jx + sgn, jz, (a * kx_at_x + (1.0 - a) * 0.5 * (kx_at_x - kz_at_x)) * inv_dx2);
        couple(jx, jz + sgn, (a * kz_at_z + (1.0 - a) * 0.5 * (kz_at_z - kx_at_z)) * inv_dz2);
      }
      if (a < 1.0) {
        for (int ex : {-1, 1}) {
          for (int ez : {-1, 1}) {
            const Complex qx = sx(x + 0.5 * ex);
            const Complex qz = sz(z + 0.5 * ez);
            const Complex k = 0.5 * (qz / qx + qx / qz);
            couple(jx + ex, jz + ez, (1.0 - a) * k * inv_diag2);
          }
        }
      }
      lap.emplace_back(row, row, center);

      auto spread = [&](Index nx_, Index nz_, double w) {
        if (w != 0.0 && nx_ >= 0 && nx_ < g.nx && nz_ >= 0 && nz_ < g.nz) {
          mass.emplace_back(row, g.index(nx_, nz_), Complex(w, 0.0));
        }
      };
      spread(jx, jz, scheme.mass_center);
      spread(jx - 1, jz, scheme.mass_edge);
      spread(jx + 1, jz, scheme.mass_edge);
      spread(jx, jz - 1, scheme.mass_edge);
      spread(jx, jz + 1, scheme.mass_edge);
      spread(jx - 1, jz - 1, scheme.mass_corner);
      spread(jx + 1, jz - 1, scheme.mass_corner);
      spread(jx - 1, jz + 1, scheme.mass_corner);
      spread(jx + 1, jz + 1, scheme.mass_corner);
    }
  }
  laplacian_.resize(g.size(), g.size());
  laplacian_.setFromTriplets(lap.begin(), lap.end());
  spread_.resize(g.size(), g.size());
  spread_.setFromTriplets(mass.begin(), mass.end());
}

SparseMatrix HelmholtzStencil::assemble(const RVector& m_pad) const {
  if (m_pad.size() != layout_.padded().size()) throw ShapeError("model size does not match padded grid");
  // Mass spread symmetrically, (B D + D B)/2, so A stays complex-symmetric
  // and the discrete Green's function is reciprocal.
  const CVector scale = (0.5 * omega_ * omega_) * damping_.cwiseProduct(m_pad.cast<Complex>());
  SparseMatrix A = spread_ * scale.asDiagonal();
  A += SparseMatrix(scale.asDiagonal() * spread_);
  A += laplacian_;
  A.makeCompressed();
  return A;
}

SparseMatrix HelmholtzStencil::mass_linearization(const CVector& u) const {
  if (u.size() != layout_.padded().size()) throw ShapeError("wavefield size does not match padded grid");
  const CVector scale = (0.5 * omega_ * omega_) * damping_.cwiseProduct(u);
  SparseMatrix L = spread_ * scale.asDiagonal();
  const CVector spread_u = (0.5 * omega_ * omega_) * damping_.cwiseProduct(spread_ * u);
  L += SparseMatrix(spread_u.asDiagonal());
  L.makeCompressed();
  return L;
}

HelmholtzOperator assemble_helmholtz(const SlownessSqModel& m, double omega, const PmlConfig& pml,
                                     const StencilScheme& scheme, std::optional<double> v_ref) {
  if (m.values.size() != m.grid.size()) throw ShapeError("model size does not match grid");
  if (!(m.values.array() > 0.0).all()) throw InvalidModelError("squared slowness must be positive");
  const double vr = v_ref ? *v_ref : 1.0 / std::sqrt(m.values.minCoeff());
  auto stencil = std::make_shared<const HelmholtzStencil>(m.grid, omega, pml, scheme, vr);
  SparseMatrix A = stencil->assemble(stencil->layout().extend(m.values));
  return {std::move(stencil), std::move(A)};
}

SparseMatrix assemble_mass_linearization(const CVector& u, const Grid2D& physical, double omega,
                                         const PmlConfig& pml, const StencilScheme& scheme,
                                         double v_ref) {
  return HelmholtzStencil(physical, omega, pml, scheme, v_ref).mass_linearization(u);
}

CVector forward_solve(const HelmholtzOperator& A, const CVector& b) {
  if (b.size() != A.matrix().rows()) throw ShapeError("source size does not match operator");
  return LuFactorization::factorize(A.matrix()).solve(b);
}

CVector analytic_green_2d(const Grid2D& grid, double src_x, double src_z, double omega, double v0) {
  if (!(v0 > 0.0) || !(omega > 0.0)) throw ParameterError("analytic Green's function needs v0, omega > 0");
  const double k = omega / v0;
  CVector out(grid.size());
  for (Index iz = 0; iz < grid.nz; ++iz) {
    for (Index ix = 0; ix < grid.nx; ++ix) {
      const double r = std::hypot(grid.x(ix) - src_x, grid.z(iz) - src_z);
      if (r < 1e-9 * std::min(grid.dx, grid.dz)) {
        out[grid.index(ix, iz)] = 0.0;
        continue;
      }
      const double kr = k * r;
      const Complex h0(std::cyl_bessel_j(0.0, kr), std::cyl_neumann(0.0, kr));
      out[grid.index(ix, iz)] = Complex(0.0, -0.25) * h0;
    }
  }
  return out;
}

}  // namespace iwri
