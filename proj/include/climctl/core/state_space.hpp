#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "climctl/core/error.hpp"

namespace climctl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Exogenous signals at one instant: control input u, disturbance w and
/// time-varying parameters theta.
struct Inputs {
  Vector u;
  Vector w;
  Vector theta;
};

/// Continuous-time nonlinear system
///   dx/dt = f(x, u, w, theta; c, t),   y = h(x, u, w, theta; c, t).
///
/// The constant record c is stored with the model and handed to both maps,
/// so callers can rebuild a perturbed model by editing `constants` alone.
struct StateSpaceModel {
  using Map = std::function<Vector(const Vector& x, const Inputs& in,
                                   const Vector& c, double t)>;

  Eigen::Index state_dim = 0;
  Eigen::Index input_dim = 0;
  Eigen::Index disturbance_dim = 0;
  Eigen::Index output_dim = 0;
  Vector constants;
  Map rhs;
  Map output;

  Vector eval_rhs(const Vector& x, const Inputs& in, double t) const {
    return rhs(x, in, constants, t);
  }
  Vector eval_output(const Vector& x, const Inputs& in, double t) const {
    return output(x, in, constants, t);
  }
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// Time-indexed record of a simulation. All four lists have equal length.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;
  std::vector<Vector> outputs;

  std::size_t size() const { return times.size(); }

  void reserve(std::size_t n) {
    times.reserve(n);
    states.reserve(n);
    inputs.reserve(n);
    outputs.reserve(n);
  }

  void push_back(double t, Vector x, Vector u, Vector y) {
    times.push_back(t);
    states.push_back(std::move(x));
    inputs.push_back(std::move(u));
    outputs.push_back(std::move(y));
  }

  /// Component `i` of every state, in time order.
  std::vector<double> component(Eigen::Index i) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& x : states) out.push_back(x(i));
    return out;
  }
};

using Forcing = std::function<Inputs(double t)>;

inline Forcing constant_forcing(Vector u, Vector w, Vector theta = {}) {
  return [u = std::move(u), w = std::move(w), theta = std::move(theta)](double) {
    return Inputs{u, w, theta};
  };
}

inline Forcing no_forcing(Eigen::Index input_dim = 0,
                          Eigen::Index disturbance_dim = 0) {
  return constant_forcing(Vector::Zero(input_dim),
                          Vector::Zero(disturbance_dim));
}

/// Tabulated forcing with zero-order hold: sample k applies on
/// [times[k], times[k+1]). Queries before the first sample use the first.
class PiecewiseConstantForcing {
 public:
  PiecewiseConstantForcing(std::vector<double> times,
                           std::vector<Inputs> samples)
      : times_(std::move(times)), samples_(std::move(samples)) {
    if (times_.empty() || times_.size() != samples_.size())
      throw DomainError("piecewise forcing: times and samples must be non-empty and equal length");
    if (!std::is_sorted(times_.begin(), times_.end()) ||
        std::adjacent_find(times_.begin(), times_.end()) != times_.end())
      throw DomainError("piecewise forcing: times must be strictly increasing");
  }

  Inputs operator()(double t) const {
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    if (it == times_.begin()) return samples_.front();
    return samples_[static_cast<std::size_t>(it - times_.begin()) - 1];
  }

 private:
  std::vector<double> times_;
  std::vector<Inputs> samples_;
};

}  // namespace climctl
