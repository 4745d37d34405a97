#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "climctl/core/integrate.hpp"
#include "climctl/estimation/kalman.hpp"

namespace climctl::estimation {

struct Ensemble {
  std::vector<Vector> members;

  std::size_t size() const { return members.size(); }
  Eigen::Index dim() const { return members.empty() ? 0 : members.front().size(); }

  void validate() const {
    if (members.size() < 2) throw DomainError("Ensemble: need at least 2 members");
    for (const auto& m : members)
      if (m.size() != members.front().size()) throw DomainError("Ensemble: members differ in dimension");
  }

  Vector mean() const {
    Vector s = Vector::Zero(dim());
    for (const auto& m : members) s += m;
    return s / static_cast<double>(members.size());
  }

  /// Sample covariance with the N-1 normalisation.
  Matrix covariance() const {
    const Vector mu = mean();
    Matrix c = Matrix::Zero(dim(), dim());
    for (const auto& m : members) c += (m - mu) * (m - mu).transpose();
    return c / static_cast<double>(members.size() - 1);
  }

  /// Columns are members.
  Matrix as_matrix() const {
    Matrix X(dim(), static_cast<Eigen::Index>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = members[i];
    return X;
  }
};

/// Factor L with L L^T = M for symmetric PSD M (eigen-based, tolerates
/// singular M).
inline Matrix psd_sqrt(const Matrix& M) {
  if (M.size() == 0) return M;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  const Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lam.asDiagonal();
}

/// Draws `count` samples of N(mean, cov) from a single seeded stream.
inline Ensemble sample_gaussian_ensemble(const Vector& mean, const Matrix& cov, std::size_t count,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Matrix L = psd_sqrt(cov);
  Ensemble e;
  e.members.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    e.members.push_back(mean + L * Vector::NullaryExpr(mean.size(), [&] { return z(rng); }));
  return e;
}

using ObservationOperator = std::function<Vector(const Vector&)>;

/// Perturbed-observation EnKF analysis.
///
/// Gain K = P_xy (P_yy + R)^-1 from ensemble anomalies; member i assimilates
/// y + e_i with e_i ~ N(0, R) drawn in member order from `seed`. With zero
/// ensemble spread P_xy vanishes and every member is returned unchanged.
inline Ensemble enkf_step(const Ensemble& forecast, const ObservationOperator& obs_op,
                          const Matrix& R_obs, const Vector& y, std::uint64_t seed) {
  forecast.validate();
  const auto ne = static_cast<Eigen::Index>(forecast.size());
  const Eigen::Index p = y.size();
  if (R_obs.rows() != p || R_obs.cols() != p) throw DomainError("enkf_step: R_obs must be p x p");

  const Matrix X = forecast.as_matrix();
  Matrix Y(p, ne);
  for (Eigen::Index i = 0; i < ne; ++i) {
    const Vector yi = obs_op(X.col(i));
    if (yi.size() != p) throw DomainError("enkf_step: observation operator returned wrong dimension");
    Y.col(i) = yi;
  }
  const Matrix Xa = X.colwise() - X.rowwise().mean();
  const Matrix Ya = Y.colwise() - Y.rowwise().mean();
  const double norm = 1.0 / static_cast<double>(ne - 1);
  const Matrix Pxy = norm * Xa * Ya.transpose();
  const Matrix Pyy = norm * Ya * Ya.transpose();

  const Eigen::LLT<Matrix> r_chol(symmetrize(R_obs));
  if (r_chol.info() != Eigen::Success) throw SingularityError("enkf_step: R_obs must be positive definite");
  const Matrix L = r_chol.matrixL();

  Matrix K = Matrix::Zero(X.rows(), p);
  if (Pxy.cwiseAbs().maxCoeff() > 0.0) {
    const Eigen::LLT<Matrix> s_chol(symmetrize(Pyy + R_obs));
    if (s_chol.info() != Eigen::Success) throw SingularityError("enkf_step: innovation covariance singular");
    K = s_chol.solve(Pxy.transpose()).transpose();
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Ensemble analysis;
  analysis.members.reserve(forecast.size());
  for (Eigen::Index i = 0; i < ne; ++i) {
    const Vector perturbed = y + L * Vector::NullaryExpr(p, [&] { return z(rng); });
    analysis.members.push_back(X.col(i) + K * (perturbed - Y.col(i)));
  }
  return analysis;
}

/// Linear forecast x <- A x + B u + N(0, Q) for every member.
inline Ensemble linear_forecast(const Ensemble& ens, const LinearGaussianSpec& spec, const Vector& u,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Matrix L = psd_sqrt(spec.Q);
  Ensemble out;
  out.members.reserve(ens.size());
  for (const auto& m : ens.members) {
    Vector next = spec.A * m + L * Vector::NullaryExpr(m.size(), [&] { return z(rng); });
    if (spec.B.cols() > 0) next += spec.B * u;
    out.members.push_back(std::move(next));
  }
  return out;
}

/// Nonlinear forecast: each member integrates `model` for `steps` steps under
/// `forcing`, then receives additive noise with standard deviation
/// `process_std` per state component.
inline Ensemble model_forecast(const Ensemble& ens, const StateSpaceModel& model, const Forcing& forcing,
                               double t0, double dt, std::size_t steps, Scheme scheme, double process_std,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Ensemble out;
  out.members.reserve(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    Trajectory tr;
    try {
      tr = integrate(model, ens.members[i], forcing, dt, steps, scheme, t0);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("ensemble member ") + std::to_string(i) + ": " + e.what(), e.step());
    }
    Vector x = tr.states.back();
    if (process_std > 0.0) x += process_std * Vector::NullaryExpr(x.size(), [&] { return z(rng); });
    out.members.push_back(std::move(x));
  }
  return out;
}

}  // namespace climctl::estimation
