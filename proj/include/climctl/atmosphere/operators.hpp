#pragma once

#include <cstddef>

#include "climctl/atmosphere/grid.hpp"

namespace climctl::atmos {

struct VectorField {
  Vector x, y, z;
};

namespace detail {

inline void check_field(const AtmosGrid& g, const Vector& f) {
  if (static_cast<std::size_t>(f.size()) != g.cells())
    throw DomainError("atmosphere operator: field length does not match grid");
}

}  // namespace detail

/// Centered difference along x (periodic).
inline Vector ddx(const AtmosGrid& g, const Vector& f) {
  detail::check_field(g, f);
  Vector out(f.size());
  const double inv = 1.0 / (2.0 * g.dx);
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        const std::size_t ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
        out(g.index(i, j, k)) = (f(g.index(ip, j, k)) - f(g.index(im, j, k))) * inv;
      }
  return out;
}

/// Centered difference along y (periodic).
inline Vector ddy(const AtmosGrid& g, const Vector& f) {
  detail::check_field(g, f);
  Vector out(f.size());
  const double inv = 1.0 / (2.0 * g.dy);
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const std::size_t jp = (j + 1) % g.ny, jm = (j + g.ny - 1) % g.ny;
      for (std::size_t i = 0; i < g.nx; ++i)
        out(g.index(i, j, k)) = (f(g.index(i, jp, k)) - f(g.index(i, jm, k))) * inv;
    }
  return out;
}

/// Centered difference along z; first-order one-sided at the top and bottom
/// levels when the vertical boundary is rigid.
inline Vector ddz(const AtmosGrid& g, const Vector& f) {
  detail::check_field(g, f);
  Vector out = Vector::Zero(f.size());
  if (g.nz == 1) return out;
  const bool wrap = g.vertical == VerticalBoundary::periodic;
  for (std::size_t k = 0; k < g.nz; ++k) {
    std::size_t kp, km;
    double inv;
    if (wrap) {
      kp = (k + 1) % g.nz;
      km = (k + g.nz - 1) % g.nz;
      inv = 1.0 / (2.0 * g.dz);
    } else if (k == 0) {
      kp = 1;
      km = 0;
      inv = 1.0 / g.dz;
    } else if (k + 1 == g.nz) {
      kp = k;
      km = k - 1;
      inv = 1.0 / g.dz;
    } else {
      kp = k + 1;
      km = k - 1;
      inv = 1.0 / (2.0 * g.dz);
    }
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i)
        out(g.index(i, j, k)) = (f(g.index(i, j, kp)) - f(g.index(i, j, km))) * inv;
  }
  return out;
}

inline VectorField grad(const AtmosGrid& g, const Vector& f) {
  return {ddx(g, f), ddy(g, f), ddz(g, f)};
}

/// Divergence of v, or of the product field weight * v when a weight is given
/// (flux form). Under fully periodic boundaries the cell sum telescopes to 0.
inline Vector div(const AtmosGrid& g, const VectorField& v, const Vector* weight = nullptr) {
  if (weight) {
    return ddx(g, weight->cwiseProduct(v.x)) + ddy(g, weight->cwiseProduct(v.y)) +
           ddz(g, weight->cwiseProduct(v.z));
  }
  return ddx(g, v.x) + ddy(g, v.y) + ddz(g, v.z);
}

/// 7-point Laplacian; mirrored (zero-gradient) ghost levels at rigid lids.
inline Vector laplacian(const AtmosGrid& g, const Vector& f) {
  detail::check_field(g, f);
  Vector out(f.size());
  const double ix = 1.0 / (g.dx * g.dx), iy = 1.0 / (g.dy * g.dy), iz = 1.0 / (g.dz * g.dz);
  const bool wrap = g.vertical == VerticalBoundary::periodic;
  for (std::size_t k = 0; k < g.nz; ++k) {
    const std::size_t kp = wrap ? (k + 1) % g.nz : (k + 1 < g.nz ? k + 1 : k);
    const std::size_t km = wrap ? (k + g.nz - 1) % g.nz : (k > 0 ? k - 1 : k);
    for (std::size_t j = 0; j < g.ny; ++j) {
      const std::size_t jp = (j + 1) % g.ny, jm = (j + g.ny - 1) % g.ny;
      for (std::size_t i = 0; i < g.nx; ++i) {
        const std::size_t ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
        const double c = f(g.index(i, j, k));
        out(g.index(i, j, k)) =
            (f(g.index(ip, j, k)) - 2.0 * c + f(g.index(im, j, k))) * ix +
            (f(g.index(i, jp, k)) - 2.0 * c + f(g.index(i, jm, k))) * iy +
            (f(g.index(i, j, kp)) - 2.0 * c + f(g.index(i, j, km))) * iz;
      }
    }
  }
  return out;
}

/// Ideal gas law p = rho R T, Pa.
inline Vector diagnose_pressure(const Vector& rho, const Vector& T, double R) {
  if (rho.size() != T.size()) throw DomainError("diagnose_pressure: field length mismatch");
  return R * rho.cwiseProduct(T);
}

}  // namespace climctl::atmos
