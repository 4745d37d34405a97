#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>

#include "climctl/core/integrate.hpp"

namespace climctl::control {

/// Gains and limits of a discrete PI law. The error is target - y, so a
/// plant whose output falls as the input rises (albedo increase cools the
/// EBM) needs negative kp and ki.
struct PiGains {
  double kp = 0.0;              // input units per K
  double ki = 0.0;              // input units per K s
  double u_min = -1.0;
  double u_max = 1.0;
  double integral_limit = 0.0;  // anti-windup clamp on the integral, K s

  void validate() const {
    if (!(u_min < u_max)) throw DomainError("PiGains: u_min must be < u_max");
    if (!(integral_limit >= 0.0)) throw DomainError("PiGains: integral_limit must be >= 0");
  }
};

struct PiUpdate {
  double u;
  double integral;
};

/// Rectangular integration with clamping anti-windup.
inline PiUpdate pi_step(double error, double integral, double dt, const PiGains& g) {
  if (!(dt > 0.0)) throw DomainError("pi_step: dt must be positive");
  const double next = std::clamp(integral + error * dt, -g.integral_limit, g.integral_limit);
  const double u = std::clamp(g.kp * error + g.ki * next, g.u_min, g.u_max);
  return {u, next};
}

struct ClosedLoopOptions {
  Scheme scheme = Scheme::rk4;
  Eigen::Index output_index = 0;  // which output is regulated
  Eigen::Index input_index = 0;   // which input channel the controller drives
  double output_noise_std = 0.0;  // additive measurement noise, default off
  std::uint64_t seed = 0;
  double t0 = 0.0;
};

/// Sampled-data loop: at each t_k the PI law maps target - y_k to u_k, which
/// is held over the step. `disturbance` supplies w and theta; its u is ignored.
/// The recorded input at the final time is the command the law would issue
/// there.
inline Trajectory closed_loop_simulate(const StateSpaceModel& model, const PiGains& gains,
                                       double target, const Vector& x0, double dt,
                                       std::size_t n_steps, const Forcing& disturbance,
                                       const ClosedLoopOptions& opt = {}) {
  gains.validate();
  if (!(dt > 0.0)) throw DomainError("closed_loop_simulate: dt must be positive");
  if (x0.size() != model.state_dim) throw DomainError("closed_loop_simulate: x0 has wrong dimension");
  if (opt.output_index >= model.output_dim || opt.input_index >= model.input_dim)
    throw DomainError("closed_loop_simulate: controller channel out of range");

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Trajectory traj;
  traj.reserve(n_steps + 1);
  Vector x = x0;
  double integral = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double t = opt.t0 + static_cast<double>(k) * dt;
    Inputs in = disturbance(t);
    in.u = Vector::Zero(model.input_dim);
    Vector y = model.eval_output(x, in, t);
    double measured = y(opt.output_index);
    if (opt.output_noise_std > 0.0) measured += opt.output_noise_std * noise(rng);
    const PiUpdate cmd = pi_step(target - measured, integral, dt, gains);
    integral = cmd.integral;
    in.u(opt.input_index) = cmd.u;
    if (k == n_steps) {
      traj.push_back(t, x, in.u, std::move(y));
      break;
    }
    auto f = [&](const Vector& s, double tau) { return model.eval_rhs(s, in, tau); };
    Vector next = explicit_step(opt.scheme, f, x, t, dt);
    traj.push_back(t, std::move(x), in.u, std::move(y));
    if (!next.allFinite()) throw NumericalError("closed_loop_simulate: non-finite state", k + 1);
    x = std::move(next);
  }
  return traj;
}

}  // namespace climctl::control
