#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "climctl/atmosphere/dynamics.hpp"
#include "climctl/atmosphere/snapshot_csv.hpp"
#include "climctl/cli/config.hpp"
#include "climctl/cli/scenario.hpp"
#include "climctl/control/pi.hpp"
#include "climctl/control/reach.hpp"
#include "climctl/control/sai.hpp"
#include "climctl/core/csv.hpp"
#include "climctl/core/integrate.hpp"
#include "climctl/estimation/calibrate.hpp"
#include "climctl/estimation/enkf.hpp"
#include "climctl/estimation/gramian.hpp"
#include "climctl/estimation/observations_csv.hpp"
#include "climctl/uq/envelope_csv.hpp"
#include "climctl/uq/monte_carlo.hpp"

namespace climctl::cli {

/// Files produced by one subcommand, in the order they were made. Nothing
/// here touches the filesystem except reading referenced inputs.
struct RunOutput {
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  json resolved_config = json::object();
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> warnings;

  const std::string& file(const std::string& name) const {
    for (const auto& [n, content] : files)
      if (n == name) return content;
    throw Error("no output named '" + name + "'");
  }
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",      "envelope", "closed-loop", "plan-sai", "assimilate",
                                              "observability", "reach",    "calibrate"};
  return names;
}

/// Independent stream seeds from one user seed (splitmix64 finaliser).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream * 0x100000001ull + index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace detail {

struct Ctx {
  Document& doc;
  Reader root;
  RunOutput& out;
  std::string root_ptr;

  /// Call once every field is read, before any heavy work.
  void parsed() const { doc.check_unused(root_ptr); }

  std::filesystem::path resolve_path(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : std::filesystem::absolute(doc.base_dir / path);
  }
};

inline std::string series_csv(const std::vector<std::string>& units, const std::vector<std::string>& header,
                              const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  out << "# units: " << csv::join(units) << '\n' << csv::join(header) << '\n';
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double v : row) cells.push_back(csv::fmt(v));
    out << csv::join(cells) << '\n';
  }
  return out.str();
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline Forcing signal_forcing(Signal u, Signal w, Eigen::Index u_dim, Eigen::Index w_dim) {
  return [u = std::move(u), w = std::move(w), u_dim, w_dim](double t) {
    return Inputs{Vector::Constant(u_dim, u.at(t)), Vector::Constant(w_dim, w.at(t)), Vector()};
  };
}

inline std::vector<std::string> indexed(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> v;
  for (Eigen::Index i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

/// Model, initial state and sensor labels for the EBM family.
struct EbmSetup {
  StateSpaceModel model;
  Vector x0;
  std::vector<std::string> sensor_ids;
};

inline EbmSetup ebm_setup(const Ctx& c, const std::string& model) {
  if (model == "ebm0d") {
    const auto b = read_ebm0d_block(c.root);
    return {ebm::ebm0d_model(b.params), Vector::Constant(1, b.T0_k), {"T"}};
  }
  const auto b = read_ebm2d_block(c.root);
  std::vector<std::string> ids;
  for (auto s : b.sensors) ids.push_back("cell" + std::to_string(s));
  return {ebm::ebm2d_model(b.params, b.sensors), b.T0_k, ids};
}

// ----------------------------------------------------------------- simulate

inline void simulate_atmos(const Ctx& c, const Common& common) {
  const AtmosBlock a = read_atmos_block(c.root);
  const Reader o = c.root.section("output", false);
  const auto every = o.count("every_steps", 1);
  c.parsed();

  const auto& g = a.grid;
  std::vector<std::vector<double>> rows;
  auto record = [&](double t, const atmos::AtmosState& s) {
    rows.push_back({t, s.total_mass(g), s.kinetic_energy_density(), s.T.mean(), s.T.minCoeff(),
                    s.rho.minCoeff(), atmos::cfl_number(s, g, common.dt_s)});
  };
  atmos::AtmosState s = a.initial;
  std::size_t cfl_warnings = 0;
  double worst_courant = 0.0;
  auto on_cfl = [&](const atmos::CflWarning& w) {
    ++cfl_warnings;
    worst_courant = std::max(worst_courant, w.courant);
  };
  for (std::size_t k = 0; k < common.steps; ++k) {
    const double t = static_cast<double>(k) * common.dt_s;
    if (k % every == 0) record(t, s);
    if (common.scheme == Scheme::euler) {
      s = atmos::atmos_step_euler(s, a.params, g, common.dt_s, t, k, on_cfl);
    } else {
      const double courant = atmos::cfl_number(s, g, common.dt_s);
      if (courant > 1.0) on_cfl({k, courant});
      auto f = [&](const Vector& x, double tau) {
        return atmos::atmos_rhs(atmos::AtmosState::unpack(x, g.cells()), a.params, g, tau);
      };
      Vector x;
      try {
        x = rk4_step(f, s.pack(), t, common.dt_s);
      } catch (const NumericalError& e) {
        throw NumericalError(e.what(), k);
      }
      s = atmos::AtmosState::unpack(x, g.cells());
      if (!(s.rho.array() > 0.0).all() || !(s.T.array() > 0.0).all())
        throw NumericalError("simulate: positivity violation in density or temperature", k + 1);
    }
  }
  record(common.horizon_s, s);
  if (cfl_warnings)
    c.out.warnings.push_back("CFL number exceeded 1 on " + std::to_string(cfl_warnings) +
                             " steps (worst " + Reader::fmt(worst_courant) + ")");
  c.out.files.emplace_back("diagnostics.csv",
                           series_csv({"s", "kg", "J m^-3", "K", "K", "kg m^-3", "-"},
                                      {"time_s", "total_mass_kg", "kinetic_energy_j_per_m3", "T_mean_k",
                                       "T_min_k", "rho_min_kg_per_m3", "courant"},
                                      rows));
  c.out.files.emplace_back("snapshot.csv", atmos::snapshot_csv(s, g));
}

inline void simulate(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d", "ebm2d", "atmos"}, c.out.seed);
  if (common.model == "atmos") return simulate_atmos(c, common);

  const EbmSetup setup = ebm_setup(c, common.model);
  const Reader f = c.root.section("forcing", false);
  const Signal u = read_signal(f, "u", 0.0), w = read_signal(f, "w", 0.0);
  c.parsed();

  const Eigen::Index n = setup.model.state_dim;
  const Trajectory tr = integrate(setup.model, setup.x0, signal_forcing(u, w, setup.model.input_dim,
                                                                        setup.model.disturbance_dim),
                                  common.dt_s, common.steps, common.scheme);
  std::vector<std::string> header{"time_s"}, units{"s"};
  for (const auto& h : n == 1 ? std::vector<std::string>{"T_k"} : indexed("T_k_cell", n)) {
    header.push_back(h);
    units.push_back("K");
  }
  header.insert(header.end(), {"u", "w"});
  units.insert(units.end(), {"-", common.model == "ebm0d" ? "-" : "W m^-2"});
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::vector<double> row{tr.times[k]};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(tr.states[k](i));
    row.push_back(u.at(tr.times[k]));
    row.push_back(w.at(tr.times[k]));
    rows.push_back(std::move(row));
  }
  c.out.files.emplace_back("trajectory.csv", series_csv(units, header, rows));
}

// ----------------------------------------------------------------- envelope

inline void envelope(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d"}, c.out.seed);
  const Ebm0dBlock b = read_ebm0d_block(c.root);
  const Reader n = c.root.section("noise", false);
  uq::NoiseSpec noise;
  noise.process_rel_std = n.nonnegative("process_rel_std", 0.10);
  noise.param_rel_std = n.nonnegative("param_rel_std", 0.01);
  noise.perturbed_params = n.strings("perturbed_params", {"alpha", "epsilon"});
  for (const auto& p : noise.perturbed_params)
    if (p != "C" && p != "S" && p != "alpha" && p != "epsilon" && p != "sigma")
      n.fail("perturbed_params", "unknown parameter '" + p + "' (expected C, S, alpha, epsilon or sigma)");
  const auto runs = n.count("n_runs", 100);
  uq::MonteCarloOptions opt;
  opt.scheme = common.scheme;
  opt.levels = c.root.numbers("levels", std::vector<double>{5.0, 50.0, 95.0});
  for (double lv : opt.levels)
    if (!(lv >= 0.0 && lv <= 100.0)) c.root.fail("levels", "levels must lie in [0, 100]");
  const bool celsius = c.root.flag("celsius", true);
  struct Scenario {
    std::string name;
    double u, w;
  };
  std::vector<Scenario> scenarios;
  for (const Reader& s : c.root.list("scenarios")) {
    Scenario sc{s.text("name"), s.number("u", 0.0), s.number("w", 0.0)};
    if (sc.name.empty() || sc.name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                               std::string::npos)
      s.fail("name", "must be a non-empty identifier of letters, digits, '_' or '-'");
    for (const auto& prev : scenarios)
      if (prev.name == sc.name) s.fail("name", "duplicate scenario name '" + sc.name + "'");
    scenarios.push_back(sc);
  }
  c.parsed();

  // All scenarios share the base seed, so their noise draws are common.
  noise.base_seed = c.out.seed;
  for (const auto& sc : scenarios) {
    const auto env = uq::monte_carlo(uq::ebm0d_factory(b.params), Vector::Constant(1, b.T0_k),
                                     ebm::ebm0d_constant_forcing(sc.u, sc.w), common.dt_s, common.steps, runs, noise,
                                     opt);
    if (env.failed_runs)
      c.out.warnings.push_back("scenario " + sc.name + ": " + std::to_string(env.failed_runs) + " of " +
                               std::to_string(runs) + " runs failed");
    c.out.files.emplace_back("envelope_" + sc.name + ".csv", uq::envelope_csv(env, celsius));
  }
}

// -------------------------------------------------------------- closed-loop

inline void closed_loop(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d"}, c.out.seed);
  const Ebm0dBlock b = read_ebm0d_block(c.root);
  const Reader ctl = c.root.section("controller");
  control::PiGains g;
  g.kp = ctl.number("kp");
  g.ki = ctl.number("ki");
  g.u_min = ctl.number("u_min", 0.0);
  g.u_max = ctl.number("u_max", 0.5);
  if (!(g.u_min < g.u_max)) ctl.fail("u_max", "must exceed u_min");
  g.integral_limit = ctl.nonnegative("integral_limit", 1e12);
  const double target = ctl.positive("target_k");
  control::ClosedLoopOptions opt;
  opt.output_noise_std = ctl.nonnegative("output_noise_std_k", 0.0);
  opt.scheme = common.scheme;
  opt.seed = derive_seed(c.out.seed, 1);
  const Reader d = c.root.section("disturbance", false);
  const Signal w = read_signal(d, "w", 0.0);
  c.parsed();

  const Trajectory tr = control::closed_loop_simulate(ebm::ebm0d_model(b.params), g, target,
                                                      Vector::Constant(1, b.T0_k), common.dt_s, common.steps,
                                                      signal_forcing(Signal{}, w, 1, 1), opt);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < tr.size(); ++k)
    rows.push_back({tr.times[k], tr.states[k](0), tr.inputs[k](0), w.at(tr.times[k]), target});
  c.out.files.emplace_back("closed_loop.csv", series_csv({"s", "K", "-", "-", "K"},
                                                         {"time_s", "T_k", "u", "w", "target_k"}, rows));
}

// ----------------------------------------------------------------- plan-sai

inline void plan_sai(const Ctx& c) {
  const Reader s = c.root.section("sai");
  json surrogate;
  if (s.has("surrogate_path")) {
    if (s.has("surrogate")) s.fail("surrogate", "give either surrogate or surrogate_path, not both");
    const auto path = c.resolve_path(s.text("surrogate_path"));
    try {
      surrogate = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
      s.fail("surrogate_path", path.string() + ": " + e.what());
    }
    s.record("surrogate_path", path.string());
  } else {
    surrogate = s.raw("surrogate");
  }
  control::SaiPlanOptions opt;
  opt.tolerance = s.positive("tolerance", opt.tolerance);
  opt.max_iterations = static_cast<int>(s.count("max_iterations", static_cast<std::uint64_t>(opt.max_iterations)));
  const auto version = c.root.count("schema_version", kSchemaVersion);
  if (version != kSchemaVersion) c.root.fail("schema_version", "unsupported version");
  c.root.record("seed", c.out.seed);
  c.doc.used.insert(c.root.path("seed"));
  c.parsed();

  control::SaiSurrogate sur;
  try {
    sur = control::sai_surrogate_from_json(surrogate);
  } catch (const DomainError& e) {
    s.fail(s.has("surrogate_path") ? "surrogate_path" : "surrogate", e.what());
  } catch (const json::exception& e) {
    s.fail(s.has("surrogate_path") ? "surrogate_path" : "surrogate", e.what());
  }
  const auto plan = control::plan_sai_shares(sur, opt);
  if (!plan.converged) c.out.warnings.push_back("plan-sai: iteration limit reached before convergence");
  c.out.files.emplace_back("plan_sai.json", dump(control::sai_plan_to_json(sur, plan)));
}

// --------------------------------------------------------------- assimilate

inline void assimilate(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d", "ebm2d"}, c.out.seed);
  const EbmSetup setup = ebm_setup(c, common.model);
  const Reader a = c.root.section("assimilation", false);
  const auto members = a.count("members", 50, 2);
  const auto every = a.count("observe_every_steps", 1);
  const double obs_std = a.positive("obs_std_k", 0.5);
  const double process_std = a.nonnegative("process_std_k", 0.0);
  const double init_offset = a.number("initial_offset_k", -5.0);
  const double init_std = a.nonnegative("initial_std_k", 2.0);
  c.parsed();

  const StateSpaceModel& m = setup.model;
  const Eigen::Index n = m.state_dim, p = m.output_dim;
  const Forcing zero = no_forcing(m.input_dim, m.disturbance_dim);
  const Inputs zero_in = zero(0.0);
  auto obs_op = [&m, &zero_in](const Vector& x) { return m.eval_output(x, zero_in, 0.0); };

  std::mt19937_64 truth_rng(derive_seed(c.out.seed, 1)), obs_rng(derive_seed(c.out.seed, 2));
  std::normal_distribution<double> z(0.0, 1.0);
  auto ens = estimation::sample_gaussian_ensemble(setup.x0 + Vector::Constant(n, init_offset),
                                                  init_std * init_std * Matrix::Identity(n, n), members,
                                                  derive_seed(c.out.seed, 3));
  const Matrix R = obs_std * obs_std * Matrix::Identity(p, p);

  std::vector<estimation::Observation> observations;
  std::vector<std::vector<double>> rows;
  auto record = [&](double t, const Vector& truth) {
    const Vector mean = ens.mean();
    const Vector spread = ens.covariance().diagonal().cwiseSqrt();
    std::vector<double> row{t};
    for (Eigen::Index i = 0; i < n; ++i) row.insert(row.end(), {truth(i), mean(i), spread(i)});
    rows.push_back(std::move(row));
  };
  Vector truth = setup.x0;
  record(0.0, truth);
  std::size_t cycle = 0;
  for (std::size_t k = 0; k < common.steps; k += every, ++cycle) {
    const std::size_t len = std::min<std::size_t>(every, common.steps - k);
    const double t = static_cast<double>(k) * common.dt_s;
    for (std::size_t j = 0; j < len; ++j) {
      const Trajectory step = integrate(m, truth, zero, common.dt_s, 1, common.scheme, t + double(j) * common.dt_s);
      truth = step.states.back();
      if (process_std > 0.0) truth += process_std * Vector::NullaryExpr(n, [&] { return z(truth_rng); });
    }
    const double t_obs = static_cast<double>(k + len) * common.dt_s;
    Vector y = obs_op(truth);
    for (Eigen::Index i = 0; i < p; ++i) {
      y(i) += obs_std * z(obs_rng);
      observations.push_back({t_obs, setup.sensor_ids[static_cast<std::size_t>(i)], y(i)});
    }
    // Forecast noise is applied once per cycle with the accumulated variance.
    ens = estimation::model_forecast(ens, m, zero, t, common.dt_s, len, common.scheme,
                                     process_std * std::sqrt(static_cast<double>(len)),
                                     derive_seed(c.out.seed, 4, cycle));
    ens = estimation::enkf_step(ens, obs_op, R, y, derive_seed(c.out.seed, 5, cycle));
    record(t_obs, truth);
  }

  std::vector<std::string> header{"time_s"}, units{"s"};
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string s = std::to_string(i);
    header.insert(header.end(), {"truth_k_" + s, "mean_k_" + s, "spread_k_" + s});
    units.insert(units.end(), {"K", "K", "K"});
  }
  c.out.files.emplace_back("observations.csv", estimation::observations_csv(observations));
  c.out.files.emplace_back("assimilation.csv", series_csv(units, header, rows));
}

// ------------------------------------------------------------ observability

inline void observability(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d", "ebm2d", "atmos"}, c.out.seed);
  StateSpaceModel model;
  Vector x_star;
  if (common.model == "atmos") {
    const AtmosBlock a = read_atmos_block(c.root);
    model = atmos::as_state_space(a.params, a.grid, a.sensors);
    x_star = a.initial.pack();
  } else {
    const EbmSetup setup = ebm_setup(c, common.model);
    model = setup.model;
    x_star = setup.x0;
  }
  const Reader o = c.root.section("observability", false);
  estimation::GramianOptions opt;
  opt.eps_scale = o.positive("eps_scale", opt.eps_scale);
  opt.rank_tolerance = o.positive("rank_tolerance", opt.rank_tolerance);
  opt.scheme = common.scheme;
  c.parsed();

  const auto rep = estimation::empirical_obs_gramian(model, x_star, common.steps, common.dt_s, opt);
  json j;
  j["state_dim"] = model.state_dim;
  j["horizon_steps"] = common.steps;
  j["rank"] = rep.rank;
  j["rank_tolerance"] = rep.rank_tolerance;
  j["eigenvalues"] = std::vector<double>(rep.eigenvalues.data(), rep.eigenvalues.data() + rep.eigenvalues.size());
  json basis = json::array();
  for (Eigen::Index col = 0; col < rep.unobservable_basis.cols(); ++col) {
    const Vector v = rep.unobservable_basis.col(col);
    basis.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  j["unobservable_basis"] = basis;
  json W = json::array();
  for (Eigen::Index r = 0; r < rep.W_o.rows(); ++r) {
    const Vector row = rep.W_o.row(r).transpose();
    W.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  j["W_o"] = W;
  c.out.files.emplace_back("observability.json", dump(j));
}

// -------------------------------------------------------------------- reach

inline void reach(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d"}, c.out.seed);
  const Ebm0dBlock b = read_ebm0d_block(c.root);
  const Reader box = c.root.section("box");
  control::BoundsBox bb;
  bb.u_lo = box.number("u_lo");
  bb.u_hi = box.number("u_hi");
  bb.w_lo = box.number("w_lo");
  bb.w_hi = box.number("w_hi");
  if (bb.u_lo > bb.u_hi) box.fail("u_hi", "must be >= u_lo");
  if (bb.w_lo > bb.w_hi) box.fail("w_hi", "must be >= w_lo");
  try {
    bb.validate(b.params);
  } catch (const DomainError& e) {
    box.fail("u_lo", e.what());
  }
  c.parsed();

  const auto env = control::reachable_envelope(b.params, bb, b.T0_k, common.dt_s, common.steps, common.scheme);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < env.lower.size(); ++k)
    rows.push_back({env.lower.times[k], env.lower.states[k](0), env.upper.states[k](0)});
  c.out.files.emplace_back("reach.csv", series_csv({"s", "K", "K"}, {"time_s", "lower_k", "upper_k"}, rows));
}

// ---------------------------------------------------------------- calibrate

inline void calibrate(const Ctx& c) {
  const Common common = read_common(c.root, {"ebm0d"}, c.out.seed);
  const Ebm0dBlock b = read_ebm0d_block(c.root);
  const Reader cal = c.root.section("calibration", false);
  const estimation::AlbedoEmissivity guess{cal.in_range("guess_alpha", 0.0, 1.0, 0.25),
                                           cal.in_range("guess_epsilon", 0.0, 1.0, 0.5)};
  estimation::CalibrationOptions opt;
  opt.scheme = common.scheme;
  opt.max_iterations = static_cast<int>(cal.count("max_iterations", 100));

  Trajectory observed;
  std::vector<estimation::Observation> synthetic;
  if (cal.has("observations_path")) {
    const auto path = c.resolve_path(cal.text("observations_path"));
    cal.record("observations_path", path.string());
    const std::string sensor = cal.text("sensor_id", "T");
    c.parsed();
    std::istringstream in(read_text_file(path));
    const auto obs = estimation::select_sensor(estimation::read_observations_csv(in), sensor);
    if (obs.size() < 3) cal.fail("sensor_id", "fewer than 3 observations for sensor '" + sensor + "'");
    for (const auto& o : obs)
      observed.push_back(o.time_s, Vector::Constant(1, o.value), Vector(), Vector::Constant(1, o.value));
  } else {
    const Reader syn = cal.section("synthetic", false);
    ebm::Ebm0dParams truth = b.params;
    truth.alpha = syn.in_range("alpha", 0.0, 1.0, 0.3);
    truth.epsilon = syn.in_range("epsilon", 0.0, 1.0, 0.61);
    const double noise = syn.nonnegative("noise_std_k", 0.1);
    c.parsed();
    const Trajectory tr = integrate(ebm::ebm0d_model(truth), Vector::Constant(1, b.T0_k),
                                    ebm::ebm0d_constant_forcing(0, 0), common.dt_s, common.steps, common.scheme);
    std::mt19937_64 rng(derive_seed(c.out.seed, 1));
    std::normal_distribution<double> z(0.0, 1.0);
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double v = tr.states[k](0) + noise * z(rng);
      observed.push_back(tr.times[k], Vector::Constant(1, v), Vector(), Vector::Constant(1, v));
      synthetic.push_back({tr.times[k], "T", v});
    }
  }

  const auto res = estimation::calibrate_ebm(observed, guess, b.params, common.dt_s, opt);
  json j;
  j["alpha"] = res.alpha;
  j["epsilon"] = res.epsilon;
  j["residual_rms_k"] = res.residual_rms;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["observations"] = observed.size();
  if (!res.converged) c.out.warnings.push_back("calibrate: Gauss-Newton did not converge");
  if (!synthetic.empty()) c.out.files.emplace_back("observations.csv", estimation::observations_csv(synthetic));
  c.out.files.emplace_back("calibration.json", dump(j));
}

}  // namespace detail

/// Runs one subcommand on a parsed document. The document may be a plain
/// scenario or a run manifest, whose resolved_config is then replayed.
/// `command` and `seed` override what the document names.
inline RunOutput run_command(Document& doc, std::optional<std::string> command,
                             std::optional<std::uint64_t> seed) {
  std::string root_ptr;
  if (doc.root.contains("resolved_config")) {
    root_ptr = "/resolved_config";
    for (const auto& [key, value] : doc.root.items()) doc.used.insert("/" + Document::escape(key));
    if (!command && doc.root.contains("command") && doc.root["command"].is_string())
      command = doc.root["command"].get<std::string>();
  }
  RunOutput out;
  Reader root(doc, root_ptr, out.resolved_config);

  if (!command) {
    if (!root.has("command")) root.fail("command", "no subcommand given on the command line or in the config");
    command = root.text("command");
  } else if (root.has("command")) {
    root.text("command");  // recorded, overridden below
  }
  bool known = false;
  for (const auto& n : command_names()) known = known || n == *command;
  if (!known) throw ConfigError("unknown subcommand '" + *command + "'");
  out.command = *command;
  root.record("command", *command);
  doc.used.insert(root.path("command"));

  if (seed) {
    out.seed = *seed;
    doc.used.insert(root.path("seed"));
  } else {
    out.seed = root.count("seed", kDefaultSeed, 0);
  }

  const detail::Ctx ctx{doc, root, out, root_ptr};
  static const std::map<std::string, std::function<void(const detail::Ctx&)>> table{
      {"simulate", detail::simulate},       {"envelope", detail::envelope},
      {"closed-loop", detail::closed_loop}, {"plan-sai", detail::plan_sai},
      {"assimilate", detail::assimilate},   {"observability", detail::observability},
      {"reach", detail::reach},             {"calibrate", detail::calibrate}};
  table.at(out.command)(ctx);
  return out;
}

/// Run manifest: everything needed to replay the run, plus its wall time.
inline json make_manifest(const RunOutput& run, double wall_time_s) {
  json m;
  m["manifest_version"] = 1;
  m["command"] = run.command;
  m["seed"] = run.seed;
  m["version"] = CLIMCTL_VERSION;
  m["wall_time_s"] = wall_time_s;
  m["resolved_config"] = run.resolved_config;
  json files = json::array();
  for (const auto& [name, content] : run.files) files.push_back(name);
  m["outputs"] = files;
  return m;
}

}  // namespace climctl::cli
