#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "climctl/core/integrate.hpp"
#include "climctl/ebm/ebm0d.hpp"

namespace climctl::estimation {

struct AlbedoEmissivity {
  double alpha = 0.0;
  double epsilon = 0.0;
};

struct CalibrationOptions {
  Scheme scheme = Scheme::rk4;
  int max_iterations = 100;
  int max_halvings = 20;
  double fd_step = 1e-6;                      // absolute, parameters are O(1)
  std::optional<double> initial_temperature;  // defaults to the first observation
};

struct CalibrationResult {
  double alpha = 0.0;
  double epsilon = 0.0;
  double residual_rms = 0.0;  // K
  int iterations = 0;
  bool converged = false;
};

namespace detail {

struct EbmFit {
  const std::vector<double>& observed;
  ebm::Ebm0dParams known;
  double dt;
  double T0;
  Scheme scheme;

  // Simulated minus observed temperatures; empty on a failed simulation.
  std::optional<Vector> residual(const AlbedoEmissivity& theta) const {
    ebm::Ebm0dParams p = known;
    p.alpha = theta.alpha;
    p.epsilon = theta.epsilon;
    try {
      const Trajectory tr = integrate(ebm::ebm0d_model(p), Vector::Constant(1, T0),
                                      ebm::ebm0d_constant_forcing(0.0, 0.0), dt, observed.size() - 1, scheme);
      Vector r(static_cast<Eigen::Index>(observed.size()));
      for (std::size_t k = 0; k < observed.size(); ++k)
        r(static_cast<Eigen::Index>(k)) = tr.states[k](0) - observed[k];
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  }
};

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace detail

/// Fits (alpha, epsilon) of the scalar EBM to a uniformly sampled
/// temperature record by box-projected Gauss-Newton with finite-difference
/// sensitivities. Each step is halved until the squared residual decreases.
inline CalibrationResult calibrate_ebm(const Trajectory& observed, AlbedoEmissivity guess,
                                       const ebm::Ebm0dParams& known, double dt,
                                       const CalibrationOptions& opt = {}) {
  if (observed.size() < 3) throw DomainError("calibrate_ebm: need at least 3 observations");
  if (!(dt > 0.0)) throw DomainError("calibrate_ebm: dt must be positive");
  if (!(guess.alpha >= 0.0 && guess.alpha <= 1.0 && guess.epsilon >= 0.0 && guess.epsilon <= 1.0))
    throw DomainError("calibrate_ebm: guess outside [0,1]^2");
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected = observed.times.front() + static_cast<double>(k) * dt;
    if (std::abs(observed.times[k] - expected) > 1e-6 * dt)
      throw DomainError("calibrate_ebm: observation times must be spaced by dt");
  }
  std::vector<double> temps;
  temps.reserve(observed.size());
  for (const auto& x : observed.states) temps.push_back(x(0));

  const detail::EbmFit fit{temps, known, dt, opt.initial_temperature.value_or(temps.front()), opt.scheme};
  const auto K = static_cast<double>(temps.size());

  CalibrationResult res;
  AlbedoEmissivity theta = guess;
  std::optional<Vector> r = fit.residual(theta);
  if (!r) throw DomainError("calibrate_ebm: model cannot be simulated at the initial guess");
  double sse = r->squaredNorm();

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    if (sse == 0.0) {
      res.converged = true;
      break;
    }
    // Sensitivities: central inside the box, one-sided at its faces.
    Matrix J(r->size(), 2);
    bool jac_ok = true;
    for (int c = 0; c < 2 && jac_ok; ++c) {
      const double v = c == 0 ? theta.alpha : theta.epsilon;
      const double hi = std::min(1.0, v + opt.fd_step), lo = std::max(0.0, v - opt.fd_step);
      AlbedoEmissivity tp = theta, tm = theta;
      (c == 0 ? tp.alpha : tp.epsilon) = hi;
      (c == 0 ? tm.alpha : tm.epsilon) = lo;
      const auto rp = fit.residual(tp), rm = fit.residual(tm);
      if (!rp || !rm || hi == lo) {
        jac_ok = false;
        break;
      }
      J.col(c) = (*rp - *rm) / (hi - lo);
    }
    if (!jac_ok) break;

    const Vector delta = J.colPivHouseholderQr().solve(-*r);
    double scale = 1.0;
    bool improved = false;
    AlbedoEmissivity trial;
    std::optional<Vector> r_trial;
    for (int h = 0; h <= opt.max_halvings; ++h, scale *= 0.5) {
      trial = {detail::clamp01(theta.alpha + scale * delta(0)),
               detail::clamp01(theta.epsilon + scale * delta(1))};
      r_trial = fit.residual(trial);
      if (r_trial && r_trial->squaredNorm() < sse) {
        improved = true;
        break;
      }
    }
    const double moved = std::max(std::abs(trial.alpha - theta.alpha), std::abs(trial.epsilon - theta.epsilon));
    if (!improved) {
      res.converged = moved <= 1e-8 || delta.norm() <= 1e-8;
      break;
    }
    theta = trial;
    r = std::move(r_trial);
    sse = r->squaredNorm();
    if (moved <= 1e-12) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.alpha = theta.alpha;
  res.epsilon = theta.epsilon;
  res.residual_rms = std::sqrt(sse / K);
  return res;
}

}  // namespace climctl::estimation
