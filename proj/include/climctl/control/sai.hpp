#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "climctl/core/state_space.hpp"

namespace climctl::control {

/// Linear surrogate of climate diagnostics under a portfolio of injection
/// policies: diagnostics ~= G * shares.
struct SaiSurrogate {
  Matrix G;  // diagnostics x policies, response per unit share
  std::vector<std::string> policy_names;
  std::vector<std::string> diagnostic_names;
  Vector target;
  Vector weights;
  double total_cooling = 0.0;

  Eigen::Index policies() const { return G.cols(); }
  Eigen::Index diagnostics() const { return G.rows(); }

  void validate() const {
    if (G.rows() == 0 || G.cols() == 0) throw DomainError("SaiSurrogate: G must be non-empty");
    if (!G.allFinite()) throw DomainError("SaiSurrogate: G must be finite");
    if (target.size() != G.rows() || weights.size() != G.rows())
      throw DomainError("SaiSurrogate: target and weights need one entry per diagnostic");
    if (!target.allFinite() || !weights.allFinite())
      throw DomainError("SaiSurrogate: target and weights must be finite");
    if ((weights.array() < 0.0).any()) throw DomainError("SaiSurrogate: weights must be >= 0");
    if (!(total_cooling >= 0.0) || !std::isfinite(total_cooling))
      throw DomainError("SaiSurrogate: total_cooling must be >= 0");
    if (!policy_names.empty() && policy_names.size() != static_cast<std::size_t>(G.cols()))
      throw DomainError("SaiSurrogate: one policy name per column of G");
    if (!diagnostic_names.empty() && diagnostic_names.size() != static_cast<std::size_t>(G.rows()))
      throw DomainError("SaiSurrogate: one diagnostic name per row of G");
  }
};

/// sum_d weights_d * (G s - target)_d^2
inline double sai_objective(const SaiSurrogate& s, const Vector& shares) {
  const Vector r = s.G * shares - s.target;
  return (s.weights.array() * r.array().square()).sum();
}

/// Euclidean projection onto {s >= 0, sum s = total} (sort-based).
inline Vector project_to_scaled_simplex(const Vector& v, double total) {
  if (total < 0.0) throw DomainError("project_to_scaled_simplex: total must be >= 0");
  const Eigen::Index n = v.size();
  if (total == 0.0) return Vector::Zero(n);
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - total) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  Vector out = (v.array() - tau).max(0.0).matrix();
  // Remove the rounding residue of the sum on the largest entry.
  Eigen::Index top = 0;
  out.maxCoeff(&top);
  out(top) += total - out.sum();
  if (out(top) < 0.0) out(top) = 0.0;
  return out;
}

struct SaiPlanOptions {
  double tolerance = 1e-10;    // on objective decrease, relative to max(1, J)
  int max_iterations = 200000;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct SaiPlan {
  Vector shares;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Weighted least squares over the scaled simplex by projected gradient with
/// Armijo backtracking. Starts from the best single-policy vertex, so the
/// returned objective never exceeds that vertex's.
inline SaiPlan plan_sai_shares(const SaiSurrogate& s, const SaiPlanOptions& opt = {}) {
  s.validate();
  const Eigen::Index k = s.policies();
  const double total = s.total_cooling;
  const Matrix WG = s.weights.asDiagonal() * s.G;
  const Matrix H = s.G.transpose() * WG;  // half Hessian
  const Vector b = WG.transpose() * s.target;

  SaiPlan plan;
  plan.shares = Vector::Zero(k);
  if (total == 0.0) {
    plan.objective = sai_objective(s, plan.shares);
    plan.converged = true;
    return plan;
  }
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector e = Vector::Zero(k);
    e(j) = total;
    const double J = sai_objective(s, e);
    if (J < best) {
      best = J;
      plan.shares = e;
    }
  }
  double J = best;

  // Accelerated projected gradient: extrapolate, take a projected step from
  // the extrapolated point, and fall back to a plain step whenever momentum
  // would increase the objective. Iterates are therefore monotone.
  const double lipschitz = 2.0 * std::max(H.norm(), 1e-300);
  double step = 1.0 / lipschitz;
  Vector previous = plan.shares;
  double theta = 1.0;
  auto descend = [&](const Vector& from, double J_from, Vector& out, double& J_out) {
    const Vector grad = 2.0 * (H * from - b);
    double eta = step * 4.0;  // let the step grow again after backtracking
    for (int bt = 0; bt < opt.max_backtracks; ++bt, eta *= 0.5) {
      out = project_to_scaled_simplex(from - eta * grad, total);
      J_out = sai_objective(s, out);
      if (J_out <= J_from + opt.armijo * grad.dot(out - from)) {
        step = eta;
        return true;
      }
    }
    return false;
  };
  // Subspace step: minimize over the face spanned by the current support and
  // walk toward that minimizer until a share hits zero. This settles
  // ill-conditioned faces where gradient steps alone crawl.
  auto face_step = [&](Vector& x, double& J_x) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < k; ++i)
      if (x(i) > 0.0) free.push_back(i);
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m < 2) return false;
    Matrix K = Matrix::Zero(m + 1, m + 1);
    Vector rhs(m + 1);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index c = 0; c < m; ++c) K(a, c) = 2.0 * H(free[a], free[c]);
      K(a, m) = K(m, a) = 1.0;
      rhs(a) = 2.0 * b(free[a]);
    }
    rhs(m) = total;
    const Vector sol = K.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return false;
    double tau = 1.0;
    for (Eigen::Index a = 0; a < m; ++a) {
      const double d = sol(a) - x(free[a]);
      if (d < 0.0) tau = std::min(tau, -x(free[a]) / d);
    }
    Vector y = x;
    for (Eigen::Index a = 0; a < m; ++a) y(free[a]) = std::max(0.0, x(free[a]) + tau * (sol(a) - x(free[a])));
    y = project_to_scaled_simplex(y, total);
    const double J_y = sai_objective(s, y);
    if (!(J_y < J_x)) return false;
    x = y;
    J_x = J_y;
    return true;
  };
  for (plan.iterations = 0; plan.iterations < opt.max_iterations; ++plan.iterations) {
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const Vector y = plan.shares + ((theta - 1.0) / theta_next) * (plan.shares - previous);
    Vector candidate;
    double Jc = 0.0;
    bool ok = descend(y, sai_objective(s, y), candidate, Jc) && Jc < J;
    if (!ok) {
      theta = 1.0;
      ok = descend(plan.shares, J, candidate, Jc) && Jc < J;
      if (!ok) {
        plan.converged = true;
        break;
      }
    } else {
      theta = theta_next;
    }
    previous = plan.shares;
    if (face_step(candidate, Jc)) {
      theta = 1.0;
      previous = candidate;
    }
    const double decrease = J - Jc;
    plan.shares = candidate;
    J = Jc;
    if (decrease <= opt.tolerance * J) {
      plan.converged = true;
      ++plan.iterations;
      break;
    }
  }
  plan.objective = J;
  return plan;
}

/// Reads the surrogate document:
///   {"schema_version": 1, "policy_names": [...], "diagnostic_names": [...],
///    "G": [[row per diagnostic]], "target": [...], "weights": [...],
///    "total_cooling": x}
/// `weights` defaults to all ones and `diagnostic_names` is optional.
inline SaiSurrogate sai_surrogate_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& m) { throw DomainError("sai surrogate: " + m); };
  if (!j.is_object()) fail("document must be an object");
  if (j.contains("schema_version") && j.at("schema_version") != 1) fail("unsupported schema_version");
  if (!j.contains("G") || !j.at("G").is_array() || j.at("G").empty()) fail("missing matrix 'G'");
  SaiSurrogate s;
  const auto& rows = j.at("G");
  const std::size_t cols = rows.at(0).size();
  s.G.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) fail("'G' rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!rows[r][c].is_number()) fail("'G' entries must be numbers");
      s.G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  auto read_vec = [&](const char* key, Vector fallback) {
    if (!j.contains(key)) {
      if (fallback.size() == 0) fail(std::string("missing '") + key + "'");
      return fallback;
    }
    const auto& a = j.at(key);
    if (!a.is_array()) fail(std::string("'") + key + "' must be an array");
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) fail(std::string("'") + key + "' entries must be numbers");
      v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    }
    return v;
  };
  s.target = read_vec("target", {});
  s.weights = read_vec("weights", Vector::Ones(s.G.rows()));
  if (!j.contains("total_cooling") || !j.at("total_cooling").is_number()) fail("missing 'total_cooling'");
  s.total_cooling = j.at("total_cooling").get<double>();
  if (j.contains("policy_names")) s.policy_names = j.at("policy_names").get<std::vector<std::string>>();
  if (j.contains("diagnostic_names"))
    s.diagnostic_names = j.at("diagnostic_names").get<std::vector<std::string>>();
  s.validate();
  return s;
}

inline nlohmann::json sai_plan_to_json(const SaiSurrogate& s, const SaiPlan& plan) {
  nlohmann::json out;
  out["shares"] = std::vector<double>(plan.shares.data(), plan.shares.data() + plan.shares.size());
  if (!s.policy_names.empty()) out["policy_names"] = s.policy_names;
  out["objective"] = plan.objective;
  out["iterations"] = plan.iterations;
  out["converged"] = plan.converged;
  out["total_cooling"] = s.total_cooling;
  return out;
}

}  // namespace climctl::control
