#pragma once

#include <string>

#include "climctl/core/state_space.hpp"

namespace climctl::estimation {

/// x_{k+1} = A x_k + B u_k + N(0, Q),  y_k = C x_k + N(0, R_obs).
struct LinearGaussianSpec {
  Matrix A, B, C_obs, Q, R_obs;

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index observations() const { return C_obs.rows(); }

  void validate() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || C_obs.cols() != n || Q.rows() != n || Q.cols() != n ||
        R_obs.rows() != C_obs.rows() || R_obs.cols() != C_obs.rows())
      throw DomainError("LinearGaussianSpec: inconsistent matrix dimensions");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff()))
      throw DomainError("LinearGaussianSpec: Q must be symmetric");
    if (R_obs.size() && (R_obs - R_obs.transpose()).cwiseAbs().maxCoeff() >
                            1e-12 * (1.0 + R_obs.cwiseAbs().maxCoeff()))
      throw DomainError("LinearGaussianSpec: R_obs must be symmetric");
  }
};

struct GaussianEstimate {
  Vector mean;
  Matrix cov;
};

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

inline GaussianEstimate kalman_predict(const GaussianEstimate& est, const LinearGaussianSpec& spec,
                                       const Vector& u) {
  GaussianEstimate out;
  out.mean = spec.A * est.mean;
  if (spec.B.cols() > 0) out.mean += spec.B * u;
  out.cov = symmetrize(spec.A * est.cov * spec.A.transpose() + spec.Q);
  return out;
}

/// Measurement update with the Joseph-form covariance
///   P+ = (I - K C) P (I - K C)^T + K R K^T.
inline GaussianEstimate kalman_update(const GaussianEstimate& prior, const LinearGaussianSpec& spec,
                                      const Vector& y) {
  const Matrix& C = spec.C_obs;
  const Matrix S = symmetrize(C * prior.cov * C.transpose() + spec.R_obs);
  const Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success || !S.allFinite())
    throw SingularityError("kalman_update: innovation covariance is not positive definite");
  const Matrix K = llt.solve(C * prior.cov).transpose();  // P C^T S^-1, P symmetric
  GaussianEstimate post;
  post.mean = prior.mean + K * (y - C * prior.mean);
  const Matrix IKC = Matrix::Identity(prior.cov.rows(), prior.cov.cols()) - K * C;
  post.cov = symmetrize(IKC * prior.cov * IKC.transpose() + K * spec.R_obs * K.transpose());
  return post;
}

inline GaussianEstimate kalman_step(const Vector& x, const Matrix& P, const LinearGaussianSpec& spec,
                                    const Vector& u, const Vector& y) {
  if (x.size() != spec.states() || P.rows() != spec.states() || P.cols() != spec.states() ||
      y.size() != spec.observations())
    throw DomainError("kalman_step: dimension mismatch");
  return kalman_update(kalman_predict({x, P}, spec, u), spec, y);
}

}  // namespace climctl::estimation
