#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "climctl/estimation/enkf.hpp"
#include "support/linear_testbed.hpp"

namespace climctl::testing {

/// Analysis means of one EnKF run over a twin record.
inline std::vector<Vector> enkf_means(const estimation::LinearGaussianSpec& s, const TwinData& twin,
                                      std::size_t members, std::uint64_t seed) {
  using namespace estimation;
  const auto obs = [C = s.C_obs](const Vector& x) { return Vector(C * x); };
  Ensemble ens = sample_gaussian_ensemble(Vector::Zero(s.states()), Matrix::Identity(s.states(), s.states()),
                                          members, seed);
  std::vector<Vector> means;
  for (std::size_t k = 0; k < twin.observations.size(); ++k) {
    ens = linear_forecast(ens, s, twin.inputs[k], seed * 1000003 + 2 * k + 1);
    ens = enkf_step(ens, obs, s.R_obs, twin.observations[k], seed * 1000003 + 2 * k + 2);
    means.push_back(ens.mean());
  }
  return means;
}

inline std::vector<Vector> kf_means(const estimation::LinearGaussianSpec& s, const TwinData& twin) {
  estimation::GaussianEstimate kf{Vector::Zero(s.states()), Matrix::Identity(s.states(), s.states())};
  std::vector<Vector> means;
  for (std::size_t k = 0; k < twin.observations.size(); ++k) {
    kf = estimation::kalman_step(kf.mean, kf.cov, s, twin.inputs[k], twin.observations[k]);
    means.push_back(kf.mean);
  }
  return means;
}

struct EnkfKfComparison {
  int failed_seeds = 0;
  double worst_ratio = 0.0;  // max over seeds and steps of |m - m_kf| / SE
};

/// Standard error of the EnKF analysis mean at each step, taken as the RMS
/// spread of `replicates` independent runs about their own average. The
/// spread never sees the KF, so a biased filter cannot hide inside it.
/// Each test seed fails if any step leaves the 3 SE ball around the KF mean.
inline EnkfKfComparison compare_enkf_with_kf(std::size_t members, std::size_t steps, int seeds, int replicates) {
  const auto s = linear_testbed();
  const TwinData twin = simulate_twin(s, Vector::Zero(4), steps, 77);
  const auto exact = kf_means(s, twin);

  std::vector<std::vector<Vector>> reps;
  for (int r = 0; r < replicates; ++r) reps.push_back(enkf_means(s, twin, members, 100000 + std::uint64_t(r)));
  std::vector<double> se(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    Vector avg = Vector::Zero(4);
    for (const auto& r : reps) avg += r[k];
    avg /= replicates;
    double ss = 0.0;
    for (const auto& r : reps) ss += (r[k] - avg).squaredNorm();
    se[k] = std::sqrt(ss / (replicates - 1));
  }

  EnkfKfComparison out;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto m = enkf_means(s, twin, members, std::uint64_t(seed));
    bool ok = true;
    for (std::size_t k = 0; k < steps; ++k) {
      const double ratio = (m[k] - exact[k]).norm() / se[k];
      out.worst_ratio = std::max(out.worst_ratio, ratio);
      ok = ok && ratio <= 3.0;
    }
    out.failed_seeds += !ok;
  }
  return out;
}

}  // namespace climctl::testing
