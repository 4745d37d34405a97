#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "climctl/core/state_space.hpp"

namespace climctl {

enum class Scheme { euler, rk4 };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::euler ? "euler" : "rk4";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk4") return Scheme::rk4;
  throw DomainError("unknown integration scheme '" + std::string(name) + "'");
}

// Single explicit steps over a derivative functor f(x, t).

template <typename F>
Vector euler_step(F&& f, const Vector& x, double t, double dt) {
  return x + dt * f(x, t);
}

template <typename F>
Vector rk4_step(F&& f, const Vector& x, double t, double dt) {
  const double h = 0.5 * dt;
  const Vector k1 = f(x, t);
  const Vector k2 = f(x + h * k1, t + h);
  const Vector k3 = f(x + h * k2, t + h);
  const Vector k4 = f(x + dt * k3, t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <typename F>
Vector explicit_step(Scheme scheme, F&& f, const Vector& x, double t, double dt) {
  return scheme == Scheme::euler ? euler_step(f, x, t, dt)
                                 : rk4_step(f, x, t, dt);
}

/// Integrates `model` from x0 at t0 for n_steps of size dt.
///
/// Inputs are sampled from `forcing` once per step at t_k and held over
/// [t_k, t_k + dt), so the produced map is x_{k+1} = f_d(x_k, u_k, w_k, theta_k).
/// The final record carries the forcing sampled at t_n.
inline Trajectory integrate(const StateSpaceModel& model, const Vector& x0,
                            const Forcing& forcing, double dt,
                            std::size_t n_steps, Scheme scheme,
                            double t0 = 0.0) {
  if (!(dt > 0.0)) throw DomainError("integrate: dt must be positive");
  if (x0.size() != model.state_dim)
    throw DomainError("integrate: initial state has " +
                      std::to_string(x0.size()) + " entries, model expects " +
                      std::to_string(model.state_dim));
  if (!x0.allFinite()) throw NumericalError("integrate: non-finite initial state", 0);

  Trajectory traj;
  traj.reserve(n_steps + 1);
  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    // t_k computed from the index, not accumulated.
    const double t = t0 + static_cast<double>(k) * dt;
    const Inputs in = forcing(t);
    Vector y = model.eval_output(x, in, t);
    if (k == n_steps) {
      traj.push_back(t, x, in.u, std::move(y));
      break;
    }
    auto f = [&](const Vector& s, double tau) { return model.eval_rhs(s, in, tau); };
    Vector next = explicit_step(scheme, f, x, t, dt);
    traj.push_back(t, std::move(x), in.u, std::move(y));
    if (!next.allFinite())
      throw NumericalError("integrate: non-finite state", k + 1);
    x = std::move(next);
  }
  return traj;
}

inline Trajectory integrate_euler(const StateSpaceModel& model, const Vector& x0,
                                  const Forcing& forcing, double dt,
                                  std::size_t n_steps, double t0 = 0.0) {
  return integrate(model, x0, forcing, dt, n_steps, Scheme::euler, t0);
}

inline Trajectory integrate_rk4(const StateSpaceModel& model, const Vector& x0,
                                const Forcing& forcing, double dt,
                                std::size_t n_steps, double t0 = 0.0) {
  return integrate(model, x0, forcing, dt, n_steps, Scheme::rk4, t0);
}

}  // namespace climctl
