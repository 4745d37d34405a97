#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "climctl/core/integrate.hpp"
#include "climctl/core/parallel.hpp"
#include "climctl/ebm/ebm0d.hpp"
#include "climctl/uq/percentiles.hpp"

namespace climctl::uq {

struct NoiseSpec {
  double process_rel_std = 0.0;  // multiplicative noise on the right-hand side, per step
  double param_rel_std = 0.0;    // multiplicative noise on named parameters, per run
  std::vector<std::string> perturbed_params;
  std::uint64_t base_seed = 0;

  void validate() const {
    if (!(process_rel_std >= 0.0) || !(param_rel_std >= 0.0))
      throw DomainError("NoiseSpec: standard deviations must be >= 0");
  }
};

/// Parameter name -> multiplicative factor drawn for one run.
using ParamFactors = std::map<std::string, double>;
using ModelFactory = std::function<StateSpaceModel(const ParamFactors&)>;

struct MonteCarloOptions {
  Scheme scheme = Scheme::rk4;
  std::vector<double> levels{5.0, 50.0, 95.0};
  Eigen::Index component = 0;
  double t0 = 0.0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// One stochastic realisation. Run r seeds its own generator with
/// base_seed + r, draws the parameter factors (1 + eta) first, in the order of
/// `perturbed_params`, then one xi_k per step; the right-hand side of step k is
/// scaled by (1 + xi_k).
inline Trajectory monte_carlo_run(const ModelFactory& factory, const Vector& x0, const Forcing& forcing,
                                  double dt, std::size_t n_steps, const NoiseSpec& noise, std::size_t run,
                                  const MonteCarloOptions& opt = {}) {
  std::mt19937_64 rng(noise.base_seed + run);
  std::normal_distribution<double> z(0.0, 1.0);
  ParamFactors factors;
  for (const auto& name : noise.perturbed_params) factors[name] = 1.0 + noise.param_rel_std * z(rng);
  const StateSpaceModel model = factory(factors);

  Trajectory traj;
  traj.reserve(n_steps + 1);
  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    const double t = opt.t0 + static_cast<double>(k) * dt;
    const Inputs in = forcing(t);
    Vector y = model.eval_output(x, in, t);
    if (k == n_steps) {
      traj.push_back(t, x, in.u, std::move(y));
      break;
    }
    const double scale = 1.0 + noise.process_rel_std * z(rng);
    auto f = [&](const Vector& s, double tau) { return Vector(scale * model.eval_rhs(s, in, tau)); };
    Vector next = explicit_step(opt.scheme, f, x, t, dt);
    traj.push_back(t, std::move(x), in.u, std::move(y));
    if (!next.allFinite()) throw NumericalError("monte_carlo: non-finite state", k + 1);
    x = std::move(next);
  }
  return traj;
}

/// Seeded ensemble of noisy runs reduced to percentile bands. Runs that throw
/// are counted as failed and left out of the bands.
inline EnsembleEnvelope monte_carlo(const ModelFactory& factory, const Vector& x0, const Forcing& forcing,
                                    double dt, std::size_t n_steps, std::size_t n_runs, const NoiseSpec& noise,
                                    const MonteCarloOptions& opt = {}) {
  noise.validate();
  if (n_runs == 0) throw DomainError("monte_carlo: n_runs must be >= 1");
  std::vector<std::optional<Trajectory>> slots(n_runs);
  parallel_for(
      n_runs,
      [&](std::size_t r) {
        try {
          slots[r] = monte_carlo_run(factory, x0, forcing, dt, n_steps, noise, r, opt);
        } catch (const Error&) {
          slots[r].reset();
        }
      },
      opt.threads);

  std::vector<Trajectory> done;
  std::size_t failed = 0;
  for (auto& s : slots) {
    if (s) done.push_back(std::move(*s));
    else ++failed;
  }
  if (done.empty()) throw NumericalError("monte_carlo: every run failed", 0);
  EnsembleEnvelope env = percentiles(done, opt.levels, opt.component);
  env.failed_runs = failed;
  return env;
}

/// Factory for the scalar EBM accepting factors on C, S, alpha, epsilon, sigma.
inline ModelFactory ebm0d_factory(const ebm::Ebm0dParams& nominal) {
  return [nominal](const ParamFactors& factors) {
    ebm::Ebm0dParams p = nominal;
    for (const auto& [name, f] : factors) {
      if (name == "C") p.C *= f;
      else if (name == "S") p.S *= f;
      else if (name == "alpha") p.alpha *= f;
      else if (name == "epsilon") p.epsilon *= f;
      else if (name == "sigma") p.sigma *= f;
      else throw DomainError("ebm0d_factory: cannot perturb unknown parameter '" + name + "'");
    }
    return ebm::ebm0d_model(p);
  };
}

}  // namespace climctl::uq
