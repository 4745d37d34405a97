#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "climctl/core/state_space.hpp"

namespace climctl {

struct Linearization {
  Matrix A;      // d rhs / d x
  Matrix B;      // d rhs / d u
  Matrix C_obs;  // d output / d x
};

namespace detail {

inline double fd_step(double value, double eps) {
  return std::max(eps * std::abs(value), 1e-9);
}

template <typename Eval>
Matrix central_jacobian(Eval&& eval, const Vector& at, Eigen::Index rows,
                        double eps, const char* name) {
  Matrix J(rows, at.size());
  Vector probe = at;
  for (Eigen::Index j = 0; j < at.size(); ++j) {
    const double h = fd_step(at(j), eps);
    probe(j) = at(j) + h;
    const Vector plus = eval(probe);
    probe(j) = at(j) - h;
    const Vector minus = eval(probe);
    probe(j) = at(j);
    J.col(j) = (plus - minus) / (2.0 * h);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!std::isfinite(J(i, j)))
        throw NumericalError(std::string("linearize: non-finite ") + name + "(" +
                                 std::to_string(i) + "," + std::to_string(j) + ")",
                             0);
    }
  }
  return J;
}

}  // namespace detail

/// Central finite-difference Jacobians at (x*, u*) with w = 0, theta empty
/// unless given, and t = 0. Step per coordinate is eps*|value| floored at 1e-9.
inline Linearization linearize(const StateSpaceModel& model, const Vector& x_star,
                               const Vector& u_star, double eps = 1e-6,
                               const Vector& w_star = {}, double t = 0.0) {
  if (!(eps > 0.0)) throw DomainError("linearize: eps must be positive");
  if (x_star.size() != model.state_dim || u_star.size() != model.input_dim)
    throw DomainError("linearize: operating point has wrong dimension");
  const Vector w = w_star.size() == 0 ? Vector::Zero(model.disturbance_dim) : w_star;

  Linearization lin;
  lin.A = detail::central_jacobian(
      [&](const Vector& x) { return model.eval_rhs(x, Inputs{u_star, w, {}}, t); },
      x_star, model.state_dim, eps, "A");
  lin.B = detail::central_jacobian(
      [&](const Vector& u) { return model.eval_rhs(x_star, Inputs{u, w, {}}, t); },
      u_star, model.state_dim, eps, "B");
  lin.C_obs = detail::central_jacobian(
      [&](const Vector& x) { return model.eval_output(x, Inputs{u_star, w, {}}, t); },
      x_star, model.output_dim, eps, "C_obs");
  return lin;
}

}  // namespace climctl
