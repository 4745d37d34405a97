#pragma once

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "climctl/core/integrate.hpp"

namespace climctl::estimation {

struct GramianReport {
  Matrix W_o;
  Vector eigenvalues;            // descending
  Matrix eigenvectors;           // columns match `eigenvalues`
  Eigen::Index rank = 0;
  double rank_tolerance = 1e-8;  // relative to the largest eigenvalue
  Matrix unobservable_basis;     // columns span the weakly observed subspace
};

struct GramianOptions {
  double eps_scale = 1e-4;       // perturbation eps_i = eps_scale * (1 + |x*_i|)
  double rank_tolerance = 1e-8;
  Scheme scheme = Scheme::rk4;
};

/// Eigen-analysis of a symmetric PSD matrix into a report.
inline GramianReport analyze_gramian(const Matrix& W, double rank_tolerance) {
  GramianReport rep;
  rep.W_o = 0.5 * (W + W.transpose());
  rep.rank_tolerance = rank_tolerance;
  const Eigen::Index n = rep.W_o.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(rep.W_o);
  rep.eigenvalues = es.eigenvalues().reverse();
  rep.eigenvectors = es.eigenvectors().rowwise().reverse();
  const double top = n ? rep.eigenvalues(0) : 0.0;
  rep.rank = 0;
  if (top > 0.0)
    for (Eigen::Index i = 0; i < n; ++i)
      if (rep.eigenvalues(i) > rank_tolerance * top) ++rep.rank;
  rep.unobservable_basis = rep.eigenvectors.rightCols(n - rep.rank);
  return rep;
}

/// Empirical observability Gramian around the trajectory from x*:
///   W_o = sum_{k=0..horizon} D(k)^T D(k) dt,
/// where column i of D(k) is (y_k(x* + eps_i e_i) - y_k(x* - eps_i e_i)) / (2 eps_i).
/// Inputs come from `forcing` (zero inputs when omitted).
inline GramianReport empirical_obs_gramian(const StateSpaceModel& model, const Vector& x_star,
                                           std::size_t horizon, double dt,
                                           const GramianOptions& opt = {},
                                           const Forcing& forcing = {}) {
  if (x_star.size() != model.state_dim) throw DomainError("empirical_obs_gramian: x* has wrong dimension");
  if (!(opt.eps_scale > 0.0)) throw DomainError("empirical_obs_gramian: eps_scale must be positive");
  const Forcing drive = forcing ? forcing : no_forcing(model.input_dim, model.disturbance_dim);
  const Eigen::Index n = model.state_dim;
  const Eigen::Index p = model.output_dim;
  const std::size_t samples = horizon + 1;

  // diffs[i] holds the scaled output differences of axis i, one block of p rows per sample.
  std::vector<Matrix> diffs(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double eps = opt.eps_scale * (1.0 + std::abs(x_star(i)));
    Vector xp = x_star, xm = x_star;
    xp(i) += eps;
    xm(i) -= eps;
    Trajectory plus, minus;
    try {
      plus = integrate(model, xp, drive, dt, horizon, opt.scheme);
      minus = integrate(model, xm, drive, dt, horizon, opt.scheme);
    } catch (const Error& e) {
      throw NumericalError("empirical_obs_gramian: axis " + std::to_string(i) + ": " + e.what(), 0);
    }
    Matrix& d = diffs[static_cast<std::size_t>(i)];
    d.resize(p, static_cast<Eigen::Index>(samples));
    for (std::size_t k = 0; k < samples; ++k)
      d.col(static_cast<Eigen::Index>(k)) = (plus.outputs[k] - minus.outputs[k]) / (2.0 * eps);
  }

  Matrix W = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = dt * (diffs[static_cast<std::size_t>(i)].array() *
                             diffs[static_cast<std::size_t>(j)].array()).sum();
      W(i, j) = v;
      W(j, i) = v;
    }
  return analyze_gramian(W, opt.rank_tolerance);
}

}  // namespace climctl::estimation
