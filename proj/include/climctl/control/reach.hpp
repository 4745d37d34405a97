#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "climctl/core/integrate.hpp"
#include "climctl/ebm/ebm0d.hpp"

namespace climctl::control {

/// Admissible constant-in-time extremes of the albedo input u and the
/// emissivity disturbance w.
struct BoundsBox {
  double u_lo = 0.0, u_hi = 0.0;
  double w_lo = 0.0, w_hi = 0.0;

  bool contains(double u, double w) const { return u >= u_lo && u <= u_hi && w >= w_lo && w <= w_hi; }

  void validate(const ebm::Ebm0dParams& p) const {
    if (!(u_lo <= u_hi) || !(w_lo <= w_hi)) throw DomainError("BoundsBox: require u_lo <= u_hi and w_lo <= w_hi");
    if (!(p.alpha + u_lo >= 0.0 && p.alpha + u_hi <= 1.0))
      throw DomainError("BoundsBox: alpha+u must stay within [0,1]");
    if (!(p.epsilon + w_lo > 0.0 && p.epsilon + w_hi <= 1.0))
      throw DomainError("BoundsBox: epsilon+w must stay within (0,1]");
  }
};

struct ReachEnvelope {
  Trajectory lower;
  Trajectory upper;
};

/// Exact bracket of every trajectory of the scalar EBM driven by measurable
/// (u(t), w(t)) inside the box. The right-hand side decreases in both u and w
/// for T > 0, so the extremes are the constant corners (u_hi, w_hi) and
/// (u_lo, w_lo).
inline ReachEnvelope reachable_envelope(const ebm::Ebm0dParams& p, const BoundsBox& box, double T0,
                                        double dt, std::size_t n_steps, Scheme scheme = Scheme::rk4) {
  p.validate(false);
  box.validate(p);
  if (!(T0 > 0.0)) throw DomainError("reachable_envelope: T0 must be positive");
  if (p.albedo_ramp) throw DomainError("reachable_envelope: requires constant albedo");
  const StateSpaceModel model = ebm::ebm0d_model(p);
  const Vector x0 = Vector::Constant(1, T0);
  return {integrate(model, x0, ebm::ebm0d_constant_forcing(box.u_hi, box.w_hi), dt, n_steps, scheme),
          integrate(model, x0, ebm::ebm0d_constant_forcing(box.u_lo, box.w_lo), dt, n_steps, scheme)};
}

/// Component-wise hull of sampled trajectories of an arbitrary model under
/// random piecewise-constant inputs. Always an under-approximation of the
/// reachable set.
struct SampledReachHull {
  std::vector<double> times;
  std::vector<Vector> lower;
  std::vector<Vector> upper;
  std::size_t samples = 0;
  static constexpr bool under_approximation = true;
};

struct SignalBox {
  Vector u_lo, u_hi, w_lo, w_hi;
};

inline SampledReachHull sampled_reach_hull(const StateSpaceModel& model, const Vector& x0,
                                           const SignalBox& box, double dt, std::size_t n_steps,
                                           std::size_t hold_steps, std::size_t n_samples,
                                           std::uint64_t seed, Scheme scheme = Scheme::rk4) {
  if (box.u_lo.size() != model.input_dim || box.u_hi.size() != model.input_dim ||
      box.w_lo.size() != model.disturbance_dim || box.w_hi.size() != model.disturbance_dim)
    throw DomainError("sampled_reach_hull: box dimensions do not match model");
  if (hold_steps == 0 || n_samples == 0) throw DomainError("sampled_reach_hull: hold_steps and n_samples must be > 0");

  SampledReachHull hull;
  hull.samples = n_samples;
  const std::size_t segments = (n_steps + hold_steps - 1) / hold_steps + 1;
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::mt19937_64 rng(seed + s);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> times;
    std::vector<Inputs> table;
    for (std::size_t seg = 0; seg < segments; ++seg) {
      Inputs in;
      in.u = box.u_lo + (box.u_hi - box.u_lo).cwiseProduct(
                            Vector::NullaryExpr(model.input_dim, [&] { return unit(rng); }));
      in.w = box.w_lo + (box.w_hi - box.w_lo).cwiseProduct(
                            Vector::NullaryExpr(model.disturbance_dim, [&] { return unit(rng); }));
      times.push_back(static_cast<double>(seg * hold_steps) * dt);
      table.push_back(std::move(in));
    }
    const PiecewiseConstantForcing forcing(std::move(times), std::move(table));
    const Trajectory tr = integrate(model, x0, forcing, dt, n_steps, scheme);
    if (s == 0) {
      hull.times = tr.times;
      hull.lower = tr.states;
      hull.upper = tr.states;
      continue;
    }
    for (std::size_t k = 0; k < tr.size(); ++k) {
      hull.lower[k] = hull.lower[k].cwiseMin(tr.states[k]);
      hull.upper[k] = hull.upper[k].cwiseMax(tr.states[k]);
    }
  }
  return hull;
}

}  // namespace climctl::control
