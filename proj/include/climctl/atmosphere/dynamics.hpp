#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "climctl/atmosphere/operators.hpp"

namespace climctl::atmos {

inline constexpr double kDryAirGasConstant = 287.0;  // J kg^-1 K^-1

struct AtmosParams {
  double f = 1e-4;                 // Coriolis parameter, s^-1 (f-plane)
  double R = kDryAirGasConstant;   // J kg^-1 K^-1
  double nu = 0.0;                 // m^2 s^-1
  std::function<Vector(double t)> heating;  // Q_T, K/s per cell; empty means none
  bool hydrostatic = false;        // freeze vz at zero

  void validate() const {
    if (!(R > 0.0)) throw DomainError("AtmosParams: R must be > 0");
    if (!(nu >= 0.0)) throw DomainError("AtmosParams: nu must be >= 0");
    if (!std::isfinite(f)) throw DomainError("AtmosParams: f must be finite");
  }
};

/// Semi-discrete right-hand side, returned packed as [vx | vy | vz | T | rho].
///
/// `extra_heating`, when non-empty, is added to the heating supplier (used by
/// the state-space wrapper to route inputs into Q_T).
inline Vector atmos_rhs(const AtmosState& s, const AtmosParams& prm, const AtmosGrid& g,
                        double t, const Vector& extra_heating = {}) {
  const auto n = static_cast<Eigen::Index>(g.cells());
  const Vector p = diagnose_pressure(s.rho, s.T, prm.R);
  const VectorField gp = grad(g, p);

  auto advect = [&](const Vector& q) {
    const VectorField gq = grad(g, q);
    return Vector(s.vx.cwiseProduct(gq.x) + s.vy.cwiseProduct(gq.y) + s.vz.cwiseProduct(gq.z));
  };
  const Eigen::ArrayXd inv_rho = s.rho.array().inverse();

  Vector out(5 * n);
  auto dvx = out.segment(0, n);
  auto dvy = out.segment(n, n);
  auto dvz = out.segment(2 * n, n);
  auto dT = out.segment(3 * n, n);
  auto drho = out.segment(4 * n, n);

  // -f k x v = (f vy, -f vx, 0)
  dvx = -advect(s.vx) + prm.f * s.vy - (inv_rho * gp.x.array()).matrix();
  dvy = -advect(s.vy) - prm.f * s.vx - (inv_rho * gp.y.array()).matrix();
  if (prm.hydrostatic) {
    dvz.setZero();
  } else {
    dvz = -advect(s.vz) - (inv_rho * gp.z.array()).matrix();
  }
  if (prm.nu > 0.0) {
    dvx += prm.nu * laplacian(g, s.vx);
    dvy += prm.nu * laplacian(g, s.vy);
    if (!prm.hydrostatic) dvz += prm.nu * laplacian(g, s.vz);
  }
  if (g.vertical == VerticalBoundary::rigid && g.nz > 1) {
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        dvz(static_cast<Eigen::Index>(g.index(i, j, 0))) = 0.0;
        dvz(static_cast<Eigen::Index>(g.index(i, j, g.nz - 1))) = 0.0;
      }
  }

  dT = -advect(s.T);
  if (prm.heating) {
    const Vector q = prm.heating(t);
    if (q.size() != n) throw DomainError("atmos_rhs: heating field must have N entries");
    dT += q;
  }
  if (extra_heating.size() != 0) {
    if (extra_heating.size() != n) throw DomainError("atmos_rhs: heating input must have N entries");
    dT += extra_heating;
  }

  drho = -div(g, VectorField{s.vx, s.vy, s.vz}, &s.rho);

  static const char* const names[] = {"vx", "vy", "vz", "T", "rho"};
  for (int b = 0; b < 5; ++b)
    if (!out.segment(b * n, n).allFinite())
      throw NumericalError(std::string("atmos_rhs: non-finite tendency in field ") + names[b], 0);
  return out;
}

/// Maximum Courant number dt * (|vx|/dx + |vy|/dy + |vz|/dz) over cells.
inline double cfl_number(const AtmosState& s, const AtmosGrid& g, double dt) {
  const Eigen::ArrayXd c = s.vx.array().abs() / g.dx + s.vy.array().abs() / g.dy +
                           s.vz.array().abs() / g.dz;
  return c.size() ? dt * c.maxCoeff() : 0.0;
}

struct CflWarning {
  std::size_t step;
  double courant;
};

using CflObserver = std::function<void(const CflWarning&)>;

/// One forward-Euler update of every prognostic field.
inline AtmosState atmos_step_euler(const AtmosState& s, const AtmosParams& prm, const AtmosGrid& g,
                                   double dt, double t = 0.0, std::size_t step = 0,
                                   const CflObserver& on_cfl = {}) {
  if (!(dt > 0.0)) throw DomainError("atmos_step_euler: dt must be positive");
  const double c = cfl_number(s, g, dt);
  if (c > 1.0 && on_cfl) on_cfl(CflWarning{step, c});

  Vector x;
  try {
    x = s.pack() + dt * atmos_rhs(s, prm, g, t);
  } catch (const NumericalError& e) {
    throw NumericalError(e.what(), step);
  }
  AtmosState next = AtmosState::unpack(x, g.cells());
  if (!(next.rho.array() > 0.0).all())
    throw NumericalError("atmos_step_euler: positivity violation, density <= 0", step + 1);
  if (!(next.T.array() > 0.0).all())
    throw NumericalError("atmos_step_euler: positivity violation, temperature <= 0", step + 1);
  return next;
}

enum class Quantity { vx, vy, vz, T, rho, p };

inline Quantity parse_quantity(const std::string& s) {
  if (s == "vx") return Quantity::vx;
  if (s == "vy") return Quantity::vy;
  if (s == "vz") return Quantity::vz;
  if (s == "T") return Quantity::T;
  if (s == "rho") return Quantity::rho;
  if (s == "p") return Quantity::p;
  throw DomainError("unknown atmospheric quantity '" + s + "'");
}

/// Point measurement of one quantity in one cell.
struct Sensor {
  Quantity quantity = Quantity::T;
  std::size_t cell = 0;
};

/// Wraps the core as dx/dt = f(x, u, w; c, t), y = h(x).
/// u and w are per-cell heating rates (K/s) added to Q_T; c = [f, R, nu].
inline StateSpaceModel as_state_space(const AtmosParams& prm, const AtmosGrid& g,
                                      std::vector<Sensor> sensors) {
  prm.validate();
  g.validate();
  for (const auto& s : sensors)
    if (s.cell >= g.cells()) throw DomainError("as_state_space: sensor cell out of range");
  const auto n = static_cast<Eigen::Index>(g.cells());

  StateSpaceModel m;
  m.state_dim = 5 * n;
  m.input_dim = n;
  m.disturbance_dim = n;
  m.output_dim = static_cast<Eigen::Index>(sensors.size());
  m.constants = Vector(3);
  m.constants << prm.f, prm.R, prm.nu;
  m.rhs = [prm, g](const Vector& x, const Inputs& in, const Vector& c, double t) {
    AtmosParams local = prm;
    local.f = c(0);
    local.R = c(1);
    local.nu = c(2);
    Vector q;
    if (in.u.size() && in.w.size()) q = in.u + in.w;
    else if (in.u.size()) q = in.u;
    else if (in.w.size()) q = in.w;
    return atmos_rhs(AtmosState::unpack(x, g.cells()), local, g, t, q);
  };
  m.output = [sensors, n](const Vector& x, const Inputs&, const Vector& c, double) {
    Vector y(static_cast<Eigen::Index>(sensors.size()));
    for (std::size_t k = 0; k < sensors.size(); ++k) {
      const auto cell = static_cast<Eigen::Index>(sensors[k].cell);
      double v = 0.0;
      switch (sensors[k].quantity) {
        case Quantity::vx: v = x(cell); break;
        case Quantity::vy: v = x(n + cell); break;
        case Quantity::vz: v = x(2 * n + cell); break;
        case Quantity::T: v = x(3 * n + cell); break;
        case Quantity::rho: v = x(4 * n + cell); break;
        case Quantity::p: v = x(4 * n + cell) * c(1) * x(3 * n + cell); break;
      }
      y(static_cast<Eigen::Index>(k)) = v;
    }
    return y;
  };
  return m;
}

}  // namespace climctl::atmos
