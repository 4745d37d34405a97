#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "climctl/atmosphere/dynamics.hpp"
#include "climctl/cli/config.hpp"
#include "climctl/core/integrate.hpp"
#include "climctl/ebm/ebm0d.hpp"
#include "climctl/ebm/ebm2d.hpp"

namespace climctl::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240501;

/// Fields shared by every subcommand.
struct Common {
  std::string model;
  double dt_s = 0.0;
  double horizon_s = 0.0;
  std::size_t steps = 0;
  Scheme scheme = Scheme::rk4;
  std::uint64_t seed = kDefaultSeed;
};

/// Reads schema_version, model, dt_s, horizon_s and integrator. `models`
/// lists the model kinds the subcommand accepts.
inline Common read_common(const Reader& r, const std::vector<std::string>& models, std::uint64_t seed,
                          const std::string& default_scheme = "rk4") {
  Common c;
  const auto version = r.count("schema_version", kSchemaVersion);
  if (version != kSchemaVersion)
    r.fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                 std::to_string(kSchemaVersion) + ")");
  c.model = r.choice("model", models, models.size() == 1 ? std::optional<std::string>(models.front()) : std::nullopt);
  c.dt_s = r.positive("dt_s");
  c.horizon_s = r.positive("horizon_s");
  if (c.dt_s > c.horizon_s)
    r.fail("dt_s", "must not exceed horizon_s (" + Reader::fmt(c.dt_s) + " > " + Reader::fmt(c.horizon_s) + ")");
  const double ratio = c.horizon_s / c.dt_s;
  c.steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(c.steps)) > 1e-9 * ratio)
    r.fail("horizon_s", "must be a whole multiple of dt_s");
  c.scheme = parse_scheme(r.choice("integrator", {"euler", "rk4"}, default_scheme));
  c.seed = seed;
  r.record("seed", seed);
  r.document().used.insert(r.path("seed"));
  return c;
}

inline ebm::Ebm0dParams read_ebm0d(const Reader& b) {
  ebm::Ebm0dParams p;
  p.C = b.positive("C_j_per_k_m2", p.C);
  p.S = b.positive("S_w_per_m2", p.S);
  p.alpha = b.in_range("alpha", 0.0, 1.0, p.alpha);
  p.epsilon = b.in_range("epsilon", 0.0, 1.0, p.epsilon);
  p.sigma = b.positive("sigma_w_per_m2_k4", p.sigma);
  p.geometric_factor = b.positive("geometric_factor", p.geometric_factor);
  if (p.geometric_factor != 1.0 && p.geometric_factor != 0.25) b.fail("geometric_factor", "must be 1 or 0.25");
  return p;
}

struct Ebm0dBlock {
  ebm::Ebm0dParams params;
  double T0_k = 288.0;
};

inline Ebm0dBlock read_ebm0d_block(const Reader& root) {
  const Reader b = root.section("ebm0d", false);
  Ebm0dBlock out;
  out.params = read_ebm0d(b);
  out.T0_k = b.positive("T0_k", 288.0);
  return out;
}

struct Ebm2dBlock {
  ebm::Ebm2dParams params;
  Vector T0_k;
  std::vector<std::size_t> sensors;
};

inline Ebm2dBlock read_ebm2d_block(const Reader& root) {
  const Reader b = root.section("ebm2d");
  Ebm2dBlock out;
  const auto rows = b.count("rows");
  const auto cols = b.count("cols");
  const double kappa = b.nonnegative("kappa_w_per_m2_k", 0.0);
  const auto boundary = b.choice("boundary", {"zero_flux", "periodic"}, "zero_flux") == "periodic"
                            ? ebm::GridBoundary::periodic
                            : ebm::GridBoundary::zero_flux;
  out.params = ebm::Ebm2dParams::uniform(rows, cols, read_ebm0d(b), kappa, boundary);
  const std::size_t cells = rows * cols;
  // A single number applies to every cell.
  const bool scalar = b.has("T0_k") && b.document().root.at(json::json_pointer(b.path("T0_k"))).is_number();
  const auto t0 = scalar ? std::vector<double>{b.number("T0_k")} : b.numbers("T0_k", std::vector<double>{288.0});
  if (t0.size() != 1 && t0.size() != cells)
    b.fail("T0_k", "must hold 1 or rows*cols = " + std::to_string(cells) + " values");
  out.T0_k = t0.size() == 1 ? Vector(Vector::Constant(static_cast<Eigen::Index>(cells), t0[0]))
                            : Vector(Eigen::Map<const Vector>(t0.data(), static_cast<Eigen::Index>(cells)));
  for (Eigen::Index i = 0; i < out.T0_k.size(); ++i)
    if (!(out.T0_k(i) > 0.0)) b.fail("T0_k", "temperatures must be > 0");
  std::vector<double> all(cells);
  for (std::size_t i = 0; i < cells; ++i) all[i] = static_cast<double>(i);
  for (double s : b.numbers("sensors", all)) {
    if (s < 0 || s >= static_cast<double>(cells) || s != std::floor(s))
      b.fail("sensors", "cell index " + Reader::fmt(s) + " out of range [0, " + std::to_string(cells) + ")");
    out.sensors.push_back(static_cast<std::size_t>(s));
  }
  return out;
}

struct AtmosBlock {
  atmos::AtmosParams params;
  atmos::AtmosGrid grid;
  atmos::AtmosState initial;
  std::vector<atmos::Sensor> sensors;
  double heating_k_per_s = 0.0;
};

inline AtmosBlock read_atmos_block(const Reader& root) {
  const Reader b = root.section("atmos");
  AtmosBlock out;
  auto& g = out.grid;
  g.nx = b.count("nx");
  g.ny = b.count("ny");
  g.nz = b.count("nz");
  g.dx = b.positive("dx_m");
  g.dy = b.positive("dy_m");
  g.dz = b.positive("dz_m");
  g.vertical = b.choice("vertical_boundary", {"rigid", "periodic"}, "rigid") == "periodic"
                   ? atmos::VerticalBoundary::periodic
                   : atmos::VerticalBoundary::rigid;
  if (g.cells() < 8) b.fail("nx", "grid needs at least 8 cells (nx*ny*nz = " + std::to_string(g.cells()) + ")");
  out.params.f = b.number("f_per_s", 1e-4);
  out.params.R = b.positive("R_j_per_kg_k", atmos::kDryAirGasConstant);
  out.params.nu = b.nonnegative("nu_m2_per_s", 0.0);
  out.params.hydrostatic = b.flag("hydrostatic", false);
  out.heating_k_per_s = b.number("heating_k_per_s", 0.0);
  if (out.heating_k_per_s != 0.0) {
    const Vector q = Vector::Constant(static_cast<Eigen::Index>(g.cells()), out.heating_k_per_s);
    out.params.heating = [q](double) { return q; };
  }

  const Reader init = b.section("initial", false);
  const double T0 = init.positive("T_k", 288.0);
  const double rho0 = init.positive("rho_kg_per_m3", 1.2);
  const double u0 = init.number("vx_m_per_s", 0.0);
  const double v0 = init.number("vy_m_per_s", 0.0);
  const double bump = init.number("bump_k", 0.0);
  const double width = init.positive("bump_width_cells", 2.0);
  out.initial = atmos::AtmosState::uniform(g, T0, rho0, u0, v0);
  // Gaussian warm (or cold) anomaly centred in the domain.
  const double ci = 0.5 * double(g.nx - 1), cj = 0.5 * double(g.ny - 1), ck = 0.5 * double(g.nz - 1);
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) {
        const double r2 = (std::pow(i - ci, 2) + std::pow(j - cj, 2) + std::pow(k - ck, 2)) / (width * width);
        out.initial.T(static_cast<Eigen::Index>(g.index(i, j, k))) += bump * std::exp(-0.5 * r2);
      }
  if (!(out.initial.T.array() > 0.0).all()) init.fail("bump_k", "initial temperature must stay > 0");

  if (b.has("sensors")) {
    for (const Reader& s : b.list("sensors")) {
      atmos::Sensor sensor;
      sensor.quantity = atmos::parse_quantity(s.choice("quantity", {"vx", "vy", "vz", "T", "rho", "p"}));
      sensor.cell = s.count("cell", std::nullopt, 0);
      if (sensor.cell >= g.cells()) s.fail("cell", "out of range [0, " + std::to_string(g.cells()) + ")");
      out.sensors.push_back(sensor);
    }
  } else {
    out.sensors.push_back({atmos::Quantity::T, 0});
    b.record("sensors", json::array({{{"quantity", "T"}, {"cell", 0}}}));
  }
  return out;
}

/// Scalar or piecewise-constant signal: either a number, or a mapping with
/// times_s and values lists of equal length.
struct Signal {
  std::vector<double> times{0.0};
  std::vector<double> values{0.0};

  double at(double t) const {
    std::size_t i = 0;
    while (i + 1 < times.size() && times[i + 1] <= t) ++i;
    return values[i];
  }
};

inline Signal read_signal(const Reader& r, const std::string& key, double fallback) {
  Signal s;
  if (!r.has(key)) {
    s.values = {r.number(key, fallback)};
    return s;
  }
  const json& j = r.document().root.at(json::json_pointer(r.path(key)));
  if (j.is_number()) {
    s.values = {r.number(key)};
    return s;
  }
  const Reader m = r.section(key);
  s.times = m.numbers("times_s");
  s.values = m.numbers("values");
  if (s.times.empty() || s.times.size() != s.values.size())
    m.fail("values", "must be non-empty and match times_s in length");
  if (s.times.front() != 0.0) m.fail("times_s", "must start at 0");
  for (std::size_t i = 1; i < s.times.size(); ++i)
    if (!(s.times[i] > s.times[i - 1])) m.fail("times_s", "must be strictly increasing");
  return s;
}

}  // namespace climctl::cli
