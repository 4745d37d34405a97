#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "climctl/ebm/ebm0d.hpp"
#include "climctl/ebm/grid_field.hpp"

namespace climctl::ebm {

enum class GridBoundary { zero_flux, periodic };

/// Exchange coefficients on cell edges, W m^-2 K^-1.
///   east(i, j):  edge between (i, j) and (i, j+1)
///   south(i, j): edge between (i, j) and (i+1, j)
/// With periodic boundaries the last column/row wraps to the first; with
/// zero-flux boundaries those entries are ignored.
struct EdgeCoefficients {
  GridField2d east;
  GridField2d south;

  static EdgeCoefficients uniform(std::size_t m, std::size_t n, double kappa) {
    return {GridField2d(m, n, kappa), GridField2d(m, n, kappa)};
  }
};

/// Linear 4-neighbour exchange L_ij = sum_edges kappa_edge * (T_kl - T_ij).
inline GridField2d diffusion_apply(const GridField2d& T, const EdgeCoefficients& kappa,
                                   GridBoundary boundary) {
  if (!T.same_shape(kappa.east) || !T.same_shape(kappa.south))
    throw DomainError("diffusion_apply: kappa shape does not match temperature grid");
  const std::size_t m = T.m, n = T.n;
  const bool wrap = boundary == GridBoundary::periodic;
  GridField2d out(m, n, 0.0);
  // Each edge transfers the same flux with opposite signs to its two cells.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j + 1 < n || (wrap && n > 1)) {
        const std::size_t jj = (j + 1) % n;
        const double flux = kappa.east(i, j) * (T(i, jj) - T(i, j));
        out(i, j) += flux;
        out(i, jj) -= flux;
      }
      if (i + 1 < m || (wrap && m > 1)) {
        const std::size_t ii = (i + 1) % m;
        const double flux = kappa.south(i, j) * (T(ii, j) - T(i, j));
        out(i, j) += flux;
        out(ii, j) -= flux;
      }
    }
  }
  return out;
}

struct Ebm2dParams {
  std::size_t m = 1;
  std::size_t n = 1;
  GridField2d C, S, alpha, epsilon;
  EdgeCoefficients kappa;
  GridBoundary boundary = GridBoundary::zero_flux;
  double sigma = kStefanBoltzmann;

  /// Every cell carries the same scalar parameters; one global kappa.
  /// The 0D geometric factor is folded into S.
  static Ebm2dParams uniform(std::size_t m, std::size_t n, const Ebm0dParams& cell,
                             double kappa, GridBoundary boundary = GridBoundary::zero_flux) {
    Ebm2dParams p;
    p.m = m;
    p.n = n;
    p.C = GridField2d(m, n, cell.C);
    p.S = GridField2d(m, n, cell.geometric_factor * cell.S);
    p.alpha = GridField2d(m, n, cell.alpha);
    p.epsilon = GridField2d(m, n, cell.epsilon);
    p.kappa = EdgeCoefficients::uniform(m, n, kappa);
    p.boundary = boundary;
    p.sigma = cell.sigma;
    return p;
  }

  void validate() const {
    if (m == 0 || n == 0) throw DomainError("Ebm2dParams: grid dimensions must be positive");
    const GridField2d* fields[] = {&C, &S, &alpha, &epsilon, &kappa.east, &kappa.south};
    const char* names[] = {"C", "S", "alpha", "epsilon", "kappa.east", "kappa.south"};
    for (int k = 0; k < 6; ++k) {
      if (fields[k]->m != m || fields[k]->n != n)
        throw DomainError(std::string("Ebm2dParams: field ") + names[k] + " is not m x n");
      fields[k]->validate(std::string("Ebm2dParams.") + names[k]);
    }
    for (std::size_t c = 0; c < m * n; ++c) {
      if (!(C.values[c] > 0.0)) throw DomainError("Ebm2dParams: C must be > 0");
      if (!(S.values[c] > 0.0)) throw DomainError("Ebm2dParams: S must be > 0");
      if (!(alpha.values[c] >= 0.0 && alpha.values[c] <= 1.0))
        throw DomainError("Ebm2dParams: alpha must lie in [0,1]");
      if (!(epsilon.values[c] >= 0.0 && epsilon.values[c] <= 1.0))
        throw DomainError("Ebm2dParams: epsilon must lie in [0,1]");
      if (!(kappa.east.values[c] >= 0.0 && kappa.south.values[c] >= 0.0))
        throw DomainError("Ebm2dParams: kappa must be >= 0");
    }
    if (!(sigma > 0.0)) throw DomainError("Ebm2dParams: sigma must be > 0");
  }
};

/// Per-cell dT/dt = [S(1 - alpha - u) - eps sigma T^4 + L(T) + F] / C.
inline GridField2d ebm2d_rhs(const GridField2d& T, const Ebm2dParams& p, const GridField2d& u,
                             const GridField2d& F) {
  if (T.m != p.m || T.n != p.n || !T.same_shape(u) || !T.same_shape(F))
    throw DomainError("ebm2d_rhs: field dimensions do not match the parameter grid");
  const GridField2d L = diffusion_apply(T, p.kappa, p.boundary);
  GridField2d out(p.m, p.n, 0.0);
  for (std::size_t c = 0; c < T.size(); ++c) {
    const double t = T.values[c];
    const double a = p.alpha.values[c] + u.values[c];
    const double e = p.epsilon.values[c];
    if (!(t > 0.0)) throw DomainError("ebm2d_rhs: temperature must be positive in cell " + std::to_string(c));
    if (!(a >= 0.0 && a <= 1.0))
      throw DomainError("ebm2d_rhs: alpha+u outside [0,1] in cell " + std::to_string(c));
    if (!(e >= 0.0 && e <= 1.0))
      throw DomainError("ebm2d_rhs: epsilon outside [0,1] in cell " + std::to_string(c));
    const double t2 = t * t;
    out.values[c] = (p.S.values[c] * (1.0 - a) - e * p.sigma * t2 * t2 + L.values[c] +
                     F.values[c]) /
                    p.C.values[c];
  }
  return out;
}

/// Gridded EBM as a state-space model. x = T (row-major), u = albedo
/// increments per cell, w = external forcing F per cell in W m^-2.
/// `sensor_cells` selects which cell temperatures appear in y; empty means all.
inline StateSpaceModel ebm2d_model(const Ebm2dParams& p,
                                   std::vector<std::size_t> sensor_cells = {}) {
  p.validate();
  const std::size_t cells = p.m * p.n;
  if (sensor_cells.empty())
    for (std::size_t c = 0; c < cells; ++c) sensor_cells.push_back(c);
  for (std::size_t c : sensor_cells)
    if (c >= cells) throw DomainError("ebm2d_model: sensor cell " + std::to_string(c) + " out of range");

  const auto dim = static_cast<Eigen::Index>(cells);
  StateSpaceModel model;
  model.state_dim = dim;
  model.input_dim = dim;
  model.disturbance_dim = dim;
  model.output_dim = static_cast<Eigen::Index>(sensor_cells.size());
  model.rhs = [p](const Vector& x, const Inputs& in, const Vector&, double) {
    const GridField2d T = GridField2d::from_vector(p.m, p.n, x);
    const GridField2d u = in.u.size() ? GridField2d::from_vector(p.m, p.n, in.u)
                                      : GridField2d(p.m, p.n, 0.0);
    const GridField2d F = in.w.size() ? GridField2d::from_vector(p.m, p.n, in.w)
                                      : GridField2d(p.m, p.n, 0.0);
    return ebm2d_rhs(T, p, u, F).to_vector();
  };
  model.output = [sensor_cells](const Vector& x, const Inputs&, const Vector&, double) {
    Vector y(static_cast<Eigen::Index>(sensor_cells.size()));
    for (std::size_t s = 0; s < sensor_cells.size(); ++s)
      y(static_cast<Eigen::Index>(s)) = x(static_cast<Eigen::Index>(sensor_cells[s]));
    return y;
  };
  return model;
}

}  // namespace climctl::ebm
