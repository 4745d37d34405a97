#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "climctl/core/state_space.hpp"

namespace climctl::atmos {

enum class VerticalBoundary {
  rigid,     // zero normal flow, one-sided stencils at top and bottom
  periodic,  // wraps like the horizontal directions (used for conservation checks)
};

/// Cartesian grid with periodic horizontal boundaries. Cell (i, j, k) with i
/// along x, j along y, k along z is stored at i + nx * (j + ny * k).
struct AtmosGrid {
  std::size_t nx = 2, ny = 2, nz = 2;
  double dx = 1e5, dy = 1e5, dz = 1e3;  // m
  VerticalBoundary vertical = VerticalBoundary::rigid;

  std::size_t cells() const { return nx * ny * nz; }
  double cell_volume() const { return dx * dy * dz; }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + nx * (j + ny * k);
  }

  void validate() const {
    if (nx == 0 || ny == 0 || nz == 0) throw DomainError("AtmosGrid: dimensions must be positive");
    if (cells() < 8) throw DomainError("AtmosGrid: need at least 8 cells");
    if (!(dx > 0.0 && dy > 0.0 && dz > 0.0)) throw DomainError("AtmosGrid: spacings must be > 0");
  }
};

/// Prognostic fields, each of length N. Packed order is [vx | vy | vz | T | rho].
struct AtmosState {
  Vector vx, vy, vz;  // m/s
  Vector T;           // K
  Vector rho;         // kg/m^3

  static AtmosState uniform(const AtmosGrid& g, double T0, double rho0,
                            double u0 = 0.0, double v0 = 0.0) {
    const auto n = static_cast<Eigen::Index>(g.cells());
    return {Vector::Constant(n, u0), Vector::Constant(n, v0), Vector::Zero(n),
            Vector::Constant(n, T0), Vector::Constant(n, rho0)};
  }

  Eigen::Index cells() const { return T.size(); }

  Vector pack() const {
    const Eigen::Index n = cells();
    Vector x(5 * n);
    x << vx, vy, vz, T, rho;
    return x;
  }

  static AtmosState unpack(const Vector& x, std::size_t cells) {
    const auto n = static_cast<Eigen::Index>(cells);
    if (x.size() != 5 * n)
      throw DomainError("AtmosState: packed vector must have 5N = " + std::to_string(5 * n) + " entries");
    return {x.segment(0, n), x.segment(n, n), x.segment(2 * n, n), x.segment(3 * n, n),
            x.segment(4 * n, n)};
  }

  void validate(const AtmosGrid& g) const {
    const auto n = static_cast<Eigen::Index>(g.cells());
    if (vx.size() != n || vy.size() != n || vz.size() != n || T.size() != n || rho.size() != n)
      throw DomainError("AtmosState: every field must have N entries");
    if (!(vx.allFinite() && vy.allFinite() && vz.allFinite() && T.allFinite() && rho.allFinite()))
      throw DomainError("AtmosState: non-finite field value");
    if (!((rho.array() > 0.0).all())) throw DomainError("AtmosState: density must be positive");
    if (!((T.array() > 0.0).all())) throw DomainError("AtmosState: temperature must be positive");
  }

  double total_mass(const AtmosGrid& g) const {
    // Pairwise reduction keeps the summation error well below 1e-13 relative.
    return rho.sum() * g.cell_volume();
  }

  double kinetic_energy_density() const {
    return 0.5 * (rho.array() * (vx.array().square() + vy.array().square() + vz.array().square())).sum();
  }
};

}  // namespace climctl::atmos
