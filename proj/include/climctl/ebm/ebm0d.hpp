#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "climctl/core/state_space.hpp"

namespace climctl::ebm {

inline constexpr double kStefanBoltzmann = 5.67e-8;  // W m^-2 K^-4
inline constexpr double kKelvinOffset = 273.15;

inline double kelvin_to_celsius(double t_k) { return t_k - kKelvinOffset; }

/// Piecewise-linear albedo ramp between an ice-covered and an ice-free value.
/// Below `t_ice_k` the albedo is `alpha_ice`, above `t_free_k` it is
/// `alpha_free`, linear in between.
struct AlbedoRamp {
  double t_ice_k = 263.0;
  double t_free_k = 293.0;
  double alpha_ice = 0.6;
  double alpha_free = 0.3;

  double operator()(double t_k) const {
    if (t_k <= t_ice_k) return alpha_ice;
    if (t_k >= t_free_k) return alpha_free;
    const double s = (t_k - t_ice_k) / (t_free_k - t_ice_k);
    return alpha_ice + s * (alpha_free - alpha_ice);
  }
};

/// Zero-dimensional energy balance model parameters.
///
/// The absorbed flux is geometric_factor * S * (1 - alpha). The default factor
/// of 1 applies the solar constant undiluted; 0.25 gives the conventional
/// disc-to-sphere average.
struct Ebm0dParams {
  double C = 8e8;          // J K^-1 m^-2
  double S = 1367.6;       // W m^-2
  double alpha = 0.3;
  double epsilon = 0.61;
  double sigma = kStefanBoltzmann;
  double geometric_factor = 1.0;
  std::optional<AlbedoRamp> albedo_ramp;  // disabled: alpha is constant

  double albedo_at(double t_k) const {
    return albedo_ramp ? (*albedo_ramp)(t_k) : alpha;
  }

  /// Throws DomainError on the first violated bound. With `strict_geometry`
  /// the geometric factor must be exactly 1 or 0.25.
  void validate(bool strict_geometry = true) const {
    auto fail = [](const std::string& m) { throw DomainError("Ebm0dParams: " + m); };
    if (!(C > 0.0)) fail("C must be > 0");
    if (!(S > 0.0)) fail("S must be > 0");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must lie in [0,1]");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon must lie in [0,1]");
    if (!(sigma > 0.0)) fail("sigma must be > 0");
    if (strict_geometry) {
      if (geometric_factor != 1.0 && geometric_factor != 0.25)
        fail("geometric_factor must be 1.0 or 0.25");
    } else if (!(geometric_factor > 0.0)) {
      fail("geometric_factor must be > 0");
    }
  }

  /// Packed constant record [C, S, alpha, epsilon, sigma, geometric_factor].
  Vector to_constants() const {
    Vector c(6);
    c << C, S, alpha, epsilon, sigma, geometric_factor;
    return c;
  }

  static Ebm0dParams from_constants(const Vector& c,
                                    std::optional<AlbedoRamp> ramp = {}) {
    if (c.size() != 6) throw DomainError("Ebm0dParams: constant record needs 6 entries");
    return Ebm0dParams{c(0), c(1), c(2), c(3), c(4), c(5), ramp};
  }
};

/// dT/dt in K/s for the forced and disturbed model
///   C dT/dt = g S (1 - (alpha + u)) - (epsilon + w) sigma T^4.
inline double ebm0d_rhs(double T, const Ebm0dParams& p, double u = 0.0,
                        double w = 0.0) {
  const double a = p.albedo_at(T) + u;
  const double e = p.epsilon + w;
  if (!(T > 0.0))
    throw DomainError("ebm0d_rhs: temperature must be positive, got " + std::to_string(T));
  if (!(a >= 0.0 && a <= 1.0))
    throw DomainError("ebm0d_rhs: alpha+u = " + std::to_string(a) + " outside [0,1]");
  if (!(e >= 0.0 && e <= 1.0))
    throw DomainError("ebm0d_rhs: epsilon+w = " + std::to_string(e) + " outside [0,1]");
  const double t2 = T * T;
  return (p.geometric_factor * p.S * (1.0 - a) - e * p.sigma * t2 * t2) / p.C;
}

/// Steady state of the constant-albedo model under constant (u, w).
inline double ebm0d_equilibrium(const Ebm0dParams& p, double u = 0.0, double w = 0.0) {
  if (p.albedo_ramp)
    throw DomainError("ebm0d_equilibrium: closed form requires constant albedo");
  const double e = p.epsilon + w;
  const double a = p.alpha + u;
  if (!(e > 0.0)) throw DomainError("ebm0d_equilibrium: degenerate emissivity epsilon+w <= 0");
  if (!(a <= 1.0)) throw DomainError("ebm0d_equilibrium: alpha+u exceeds 1");
  return std::pow(p.geometric_factor * p.S * (1.0 - a) / (e * p.sigma), 0.25);
}

/// Scalar EBM as a state-space model: x = [T], u = [albedo increment],
/// w = [emissivity increment], y = [T] in Kelvin.
inline StateSpaceModel ebm0d_model(const Ebm0dParams& p) {
  p.validate(false);
  StateSpaceModel m;
  m.state_dim = 1;
  m.input_dim = 1;
  m.disturbance_dim = 1;
  m.output_dim = 1;
  m.constants = p.to_constants();
  m.rhs = [ramp = p.albedo_ramp](const Vector& x, const Inputs& in, const Vector& c,
                                 double) {
    const double u = in.u.size() > 0 ? in.u(0) : 0.0;
    const double w = in.w.size() > 0 ? in.w(0) : 0.0;
    Vector d(1);
    d(0) = ebm0d_rhs(x(0), Ebm0dParams::from_constants(c, ramp), u, w);
    return d;
  };
  m.output = [](const Vector& x, const Inputs&, const Vector&, double) { return Vector(x); };
  return m;
}

inline Forcing ebm0d_constant_forcing(double u, double w) {
  return constant_forcing(Vector::Constant(1, u), Vector::Constant(1, w));
}

}  // namespace climctl::ebm
