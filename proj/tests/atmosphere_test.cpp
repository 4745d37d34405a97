#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "climctl/atmosphere/dynamics.hpp"
#include "climctl/atmosphere/snapshot_csv.hpp"
#include "climctl/core/integrate.hpp"
#include "support/atmos_fixtures.hpp"

namespace climctl::atmos {
namespace {

const double kPi = std::acos(-1.0);

AtmosGrid box(std::size_t nx, std::size_t ny, std::size_t nz, VerticalBoundary vb = VerticalBoundary::rigid) {
  AtmosGrid g;
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  g.dx = 2e4;
  g.dy = 3e4;
  g.dz = 500.0;
  g.vertical = vb;
  return g;
}

// Cell-by-cell evaluation of the tendencies written out with explicit
// neighbour indexing, independent of the operator layer.
struct ReferenceRhs {
  const AtmosGrid& g;
  const AtmosParams& prm;
  const AtmosState& s;

  double at(const Vector& f, long i, long j, long k) const {
    const long nx = long(g.nx), ny = long(g.ny);
    i = ((i % nx) + nx) % nx;
    j = ((j % ny) + ny) % ny;
    return f(long(g.index(std::size_t(i), std::size_t(j), std::size_t(k))));
  }
  double d_dx(const Vector& f, long i, long j, long k) const {
    return (at(f, i + 1, j, k) - at(f, i - 1, j, k)) / (2 * g.dx);
  }
  double d_dy(const Vector& f, long i, long j, long k) const {
    return (at(f, i, j + 1, k) - at(f, i, j - 1, k)) / (2 * g.dy);
  }
  double d_dz(const Vector& f, long i, long j, long k) const {
    const long nz = long(g.nz);
    if (k == 0) return (at(f, i, j, 1) - at(f, i, j, 0)) / g.dz;
    if (k == nz - 1) return (at(f, i, j, k) - at(f, i, j, k - 1)) / g.dz;
    return (at(f, i, j, k + 1) - at(f, i, j, k - 1)) / (2 * g.dz);
  }
  double lap(const Vector& f, long i, long j, long k) const {
    const long nz = long(g.nz);
    const double c = at(f, i, j, k);
    const double up = k + 1 < nz ? at(f, i, j, k + 1) : c;
    const double dn = k > 0 ? at(f, i, j, k - 1) : c;
    return (at(f, i + 1, j, k) - 2 * c + at(f, i - 1, j, k)) / (g.dx * g.dx) +
           (at(f, i, j + 1, k) - 2 * c + at(f, i, j - 1, k)) / (g.dy * g.dy) + (up - 2 * c + dn) / (g.dz * g.dz);
  }

  // Returns {dvx, dvy, dvz, dT, drho} for cell (i, j, k).
  std::array<double, 5> cell(long i, long j, long k) const {
    Vector p(s.T.size());
    for (Eigen::Index c = 0; c < p.size(); ++c) p(c) = s.rho(c) * prm.R * s.T(c);
    Vector fx = s.rho.cwiseProduct(s.vx), fy = s.rho.cwiseProduct(s.vy), fz = s.rho.cwiseProduct(s.vz);
    const double u = at(s.vx, i, j, k), v = at(s.vy, i, j, k), w = at(s.vz, i, j, k), r = at(s.rho, i, j, k);
    auto adv = [&](const Vector& q) { return u * d_dx(q, i, j, k) + v * d_dy(q, i, j, k) + w * d_dz(q, i, j, k); };
    std::array<double, 5> out{};
    out[0] = -adv(s.vx) + prm.f * v - d_dx(p, i, j, k) / r + prm.nu * lap(s.vx, i, j, k);
    out[1] = -adv(s.vy) - prm.f * u - d_dy(p, i, j, k) / r + prm.nu * lap(s.vy, i, j, k);
    out[2] = -adv(s.vz) - d_dz(p, i, j, k) / r + prm.nu * lap(s.vz, i, j, k);
    if (k == 0 || k == long(g.nz) - 1) out[2] = 0.0;
    out[3] = -adv(s.T);
    out[4] = -(d_dx(fx, i, j, k) + d_dy(fy, i, j, k) + d_dz(fz, i, j, k));
    return out;
  }
};

TEST(Operators, ConstantFieldHasZeroGradient) {
  const AtmosGrid g = box(4, 3, 5);
  const VectorField gr = grad(g, Vector::Constant(long(g.cells()), 7.5));
  EXPECT_EQ(gr.x.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(gr.y.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(gr.z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Operators, PeriodicSineUsesDiscreteWavenumber) {
  const AtmosGrid g = box(16, 2, 2);
  const double L = 16 * g.dx, k = 2 * kPi / L;
  Vector f(long(g.cells()));
  for (std::size_t kk = 0; kk < g.nz; ++kk)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) f(long(g.index(i, j, kk))) = std::sin(k * double(i) * g.dx);
  const Vector d = ddx(g, f);
  for (std::size_t i = 0; i < g.nx; ++i)
    EXPECT_NEAR(d(long(g.index(i, 1, 1))), std::sin(k * g.dx) / g.dx * std::cos(k * double(i) * g.dx), 1e-15);
}

TEST(Operators, LinearInHeightHasExactSlope) {
  const AtmosGrid g = box(2, 2, 6);
  Vector f(long(g.cells()));
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) f(long(g.index(i, j, k))) = 3.0 + 0.25 * double(k) * g.dz;
  const Vector d = ddz(g, f);
  for (Eigen::Index c = 0; c < d.size(); ++c) EXPECT_NEAR(d(c), 0.25, 1e-12);
}

TEST(Operators, FluxDivergenceTelescopesUnderPeriodicBoundaries) {
  const AtmosGrid g = testing::periodic_cube(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AtmosState s = testing::random_smooth_state(g, seed);
    const Vector d = div(g, {s.vx, s.vy, s.vz}, &s.rho);
    EXPECT_LE(std::abs(d.sum()), 1e-12 * d.cwiseAbs().sum());
  }
  EXPECT_EQ(div(g, {Vector::Constant(512, 1.0), Vector::Constant(512, -2.0), Vector::Constant(512, 3.0)})
                .cwiseAbs()
                .maxCoeff(),
            0.0);
}

TEST(Operators, ProductRuleAgreesToSecondOrder) {
  // div(rho v) - (v . grad rho + rho div v) is O(dx^2) on smooth fields.
  double prev = 0.0;
  for (std::size_t n : {32u, 64u, 128u}) {
    AtmosGrid g = testing::periodic_cube(n, 1.0 / double(n));
    g.nz = 1;
    g.ny = 1;
    const long N = long(g.cells());
    Vector rho(N), vx(N);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = double(i) / double(n);
      rho(long(i)) = 1.0 + 0.3 * std::sin(2 * kPi * x);
      vx(long(i)) = std::cos(2 * kPi * x) + 0.5 * std::sin(4 * kPi * x);
    }
    const Vector zero = Vector::Zero(N);
    const Vector flux = div(g, {vx, zero, zero}, &rho);
    const Vector expanded = vx.cwiseProduct(ddx(g, rho)) + rho.cwiseProduct(div(g, {vx, zero, zero}));
    const double err = (flux - expanded).cwiseAbs().maxCoeff();
    if (prev > 0.0) {
      EXPECT_GT(prev / err, 3.5);
      EXPECT_LT(prev / err, 4.5);
    }
    prev = err;
  }
}

TEST(Operators, IdealGasPressure) {
  const Vector p = diagnose_pressure(Vector::Constant(1, 1.2), Vector::Constant(1, 288.0), 287.0);
  EXPECT_NEAR(p(0), 99187.2, 1e-9);
  EXPECT_NEAR(diagnose_pressure(Vector::Constant(1, 1e-300), Vector::Constant(1, 288.0), 287.0)(0), 0.0, 1e-290);
  const Vector p2 = diagnose_pressure(Vector::Constant(1, 1.2), Vector::Constant(1, 576.0), 287.0);
  EXPECT_DOUBLE_EQ(p2(0), 2.0 * p(0));
}

TEST(Operators, LaplacianOfQuadraticInZ) {
  const AtmosGrid g = box(2, 2, 5);
  Vector f(long(g.cells()));
  for (std::size_t k = 0; k < g.nz; ++k)
    for (std::size_t j = 0; j < g.ny; ++j)
      for (std::size_t i = 0; i < g.nx; ++i) f(long(g.index(i, j, k))) = std::pow(double(k) * g.dz, 2);
  const Vector l = laplacian(g, f);
  // Interior levels see the exact second derivative 2.
  for (std::size_t k = 1; k + 1 < g.nz; ++k) EXPECT_NEAR(l(long(g.index(0, 0, k))), 2.0, 1e-12);
}

TEST(AtmosRhs, RestingUniformAtmosphereIsFixedPoint) {
  const AtmosGrid g = box(4, 4, 4);
  AtmosParams prm;
  prm.nu = 10.0;
  const AtmosState s = AtmosState::uniform(g, 288.0, 1.2);
  EXPECT_EQ(atmos_rhs(s, prm, g, 0.0).cwiseAbs().maxCoeff(), 0.0);
  for (double dt : {1.0, 1e3, 1e6}) {
    const AtmosState n = atmos_step_euler(s, prm, g, dt);
    EXPECT_EQ(n.pack(), s.pack());
  }
}

TEST(AtmosRhs, InertialRotationRates) {
  const AtmosGrid g = box(3, 3, 3);
  AtmosParams prm;
  prm.f = 1e-4;
  const AtmosState s = AtmosState::uniform(g, 288.0, 1.2, 10.0, 0.0);
  const Vector d = atmos_rhs(s, prm, g, 0.0);
  const long N = long(g.cells());
  for (long c = 0; c < N; ++c) {
    EXPECT_EQ(d(c), 0.0);
    EXPECT_DOUBLE_EQ(d(N + c), -1e-3);
    EXPECT_EQ(d(2 * N + c), 0.0);
  }
}

TEST(AtmosRhs, DensityTendencySumsToZeroWhenPeriodic) {
  const AtmosGrid g = testing::periodic_cube(6);
  const AtmosParams prm;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AtmosState s = testing::random_smooth_state(g, seed);
    const Vector d = atmos_rhs(s, prm, g, 0.0);
    const long N = long(g.cells());
    EXPECT_LE(std::abs(d.segment(4 * N, N).sum()), 1e-12 * d.segment(4 * N, N).cwiseAbs().sum());
  }
}

TEST(AtmosRhs, MatchesCellwiseReference) {
  for (auto g : {box(2, 2, 2), box(3, 3, 3), box(4, 3, 5)}) {
    AtmosParams prm;
    prm.f = 1.2e-4;
    prm.nu = 50.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const AtmosState s = testing::random_smooth_state(g, 100 + seed);
      const double dt = 30.0;
      const AtmosState next = atmos_step_euler(s, prm, g, dt);
      const ReferenceRhs ref{g, prm, s};
      for (std::size_t k = 0; k < g.nz; ++k)
        for (std::size_t j = 0; j < g.ny; ++j)
          for (std::size_t i = 0; i < g.nx; ++i) {
            const auto r = ref.cell(long(i), long(j), long(k));
            const long c = long(g.index(i, j, k));
            EXPECT_NEAR(next.vx(c), s.vx(c) + dt * r[0], 1e-10);
            EXPECT_NEAR(next.vy(c), s.vy(c) + dt * r[1], 1e-10);
            EXPECT_NEAR(next.vz(c), s.vz(c) + dt * r[2], 1e-10);
            EXPECT_NEAR(next.T(c), s.T(c) + dt * r[3], 1e-9);
            EXPECT_NEAR(next.rho(c), s.rho(c) + dt * r[4], 1e-13);
          }
    }
  }
}

TEST(AtmosRhs, HeatingSupplierAndHydrostaticSwitch) {
  const AtmosGrid g = box(2, 2, 4);
  AtmosParams prm;
  prm.heating = [&](double) { return Vector(Vector::Constant(long(g.cells()), 1e-5)); };
  AtmosState s = testing::random_smooth_state(g, 3);
  const long N = long(g.cells());
  const Vector with = atmos_rhs(s, prm, g, 0.0);
  prm.heating = nullptr;
  const Vector without = atmos_rhs(s, prm, g, 0.0);
  EXPECT_NEAR((with - without).segment(3 * N, N).maxCoeff(), 1e-5, 1e-18);
  prm.hydrostatic = true;
  EXPECT_EQ(atmos_rhs(s, prm, g, 0.0).segment(2 * N, N).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AtmosStep, MassConservedPerEulerStep) {
  const AtmosGrid g = testing::periodic_cube(8);
  const AtmosParams prm;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AtmosState s = testing::random_smooth_state(g, seed);
    for (int n = 0; n < 20; ++n) {
      const double before = s.total_mass(g);
      s = atmos_step_euler(s, prm, g, 100.0, 100.0 * n, std::size_t(n));
      EXPECT_LE(std::abs(s.total_mass(g) - before) / before, 1e-12);
    }
  }
}

TEST(AtmosStep, CflWarningAndPositivityError) {
  const AtmosGrid g = box(4, 4, 2);
  const AtmosParams prm;
  AtmosState s = AtmosState::uniform(g, 288.0, 1.2, 100.0, 0.0);
  int warnings = 0;
  double seen = 0.0;
  atmos_step_euler(s, prm, g, 400.0, 0.0, 7, [&](const CflWarning& w) {
    ++warnings;
    seen = w.courant;
    EXPECT_EQ(w.step, 7u);
  });
  EXPECT_EQ(warnings, 1);
  EXPECT_DOUBLE_EQ(seen, 2.0);

  s = testing::random_smooth_state(g, 5, 50.0);
  EXPECT_THROW(
      {
        for (int n = 0; n < 1000; ++n) s = atmos_step_euler(s, prm, g, 5000.0, 0.0, std::size_t(n));
      },
      NumericalError);
}

TEST(Cfl, Arithmetic) {
  AtmosGrid g = box(2, 2, 2);
  g.dx = 1000.0;
  AtmosState s = AtmosState::uniform(g, 288.0, 1.2);
  EXPECT_EQ(cfl_number(s, g, 10.0), 0.0);
  s.vx.setConstant(-10.0);
  EXPECT_DOUBLE_EQ(cfl_number(s, g, 10.0), 0.1);
  EXPECT_DOUBLE_EQ(cfl_number(s, g, 20.0), 0.2);
}

TEST(Advection, MatchesModalSolution) {
  AtmosGrid g;
  g.nx = 16;
  g.ny = 1;
  g.nz = 1;
  g.dx = 1e5;
  AtmosParams prm;
  prm.f = 0.0;
  prm.R = 1e-30;  // passive-tracer limit: pressure feedback negligible
  const double u0 = 10.0, dt = 1000.0, A = 10.0, T0 = 288.0;
  const double k = 2 * kPi / (16 * g.dx);
  AtmosState s = AtmosState::uniform(g, T0, 1.2, u0, 0.0);
  for (std::size_t i = 0; i < g.nx; ++i) s.T(long(i)) = T0 + A * std::sin(k * double(i) * g.dx);

  const auto model = as_state_space(prm, g, {});
  const std::size_t steps = 200;
  const Trajectory tr = integrate_rk4(model, s.pack(), no_forcing(), dt, steps);

  const std::complex<double> z(0.0, -u0 * dt * std::sin(k * g.dx) / g.dx);
  const std::complex<double> amp = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
  const AtmosState end = AtmosState::unpack(tr.states.back(), g.cells());
  const std::complex<double> gn = std::pow(amp, double(steps));
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double expected = T0 + A * (std::polar(1.0, k * double(i) * g.dx) * gn).imag();
    EXPECT_NEAR(end.T(long(i)), expected, 1e-8);
  }
}

TEST(InertialOscillation, Rk4TracksRotationAndEulerGrowsEnergy) {
  const AtmosGrid g = box(2, 2, 2);
  AtmosParams prm;
  prm.f = 1e-4;
  const double dt = 0.01 / prm.f, u0 = 10.0;
  const auto model = as_state_space(prm, g, {{Quantity::vx, 0}, {Quantity::vy, 0}});
  const auto steps = std::size_t(std::llround(2 * kPi / (prm.f * dt)));
  const Vector x0 = AtmosState::uniform(g, 288.0, 1.2, u0, 0.0).pack();
  const Trajectory rk = integrate_rk4(model, x0, no_forcing(), dt, steps);
  for (std::size_t n = 0; n < rk.size(); ++n) {
    const double t = rk.times[n];
    const double u = rk.outputs[n](0), v = rk.outputs[n](1);
    const double eu = u0 * std::cos(prm.f * t), ev = -u0 * std::sin(prm.f * t);
    EXPECT_LE(std::hypot(u - eu, v - ev) / u0, 1e-6);
    EXPECT_LE(std::abs(u * u + v * v - u0 * u0) / (u0 * u0), 1e-6);
  }
  const Trajectory eu = integrate_euler(model, x0, no_forcing(), dt, 100);
  for (std::size_t n = 1; n < eu.size(); ++n) {
    const double e0 = eu.outputs[n - 1].squaredNorm(), e1 = eu.outputs[n].squaredNorm();
    EXPECT_LE(std::abs(e1 / e0 - (1.0 + 1e-4)) / (1.0 + 1e-4), 1e-10);
  }
}

TEST(StateSpace, DimensionsSensorsAndDelegation) {
  const AtmosGrid g = box(2, 2, 3);
  AtmosParams prm;
  prm.nu = 5.0;
  const long N = long(g.cells());
  const auto model = as_state_space(prm, g, {{Quantity::T, 5}, {Quantity::p, 5}, {Quantity::vy, 2}});
  EXPECT_EQ(model.state_dim, 5 * N);
  EXPECT_EQ(model.output_dim, 3);
  const AtmosState s = testing::random_smooth_state(g, 9);
  const Vector y = model.eval_output(s.pack(), {}, 0.0);
  EXPECT_EQ(y(0), s.T(5));
  EXPECT_DOUBLE_EQ(y(1), s.rho(5) * 287.0 * s.T(5));
  EXPECT_EQ(y(2), s.vy(2));
  EXPECT_EQ(model.eval_rhs(s.pack(), {}, 0.0), atmos_rhs(s, prm, g, 0.0));
  const Inputs heat{Vector::Constant(N, 2e-5), Vector::Constant(N, 1e-5), {}};
  const Vector d = model.eval_rhs(s.pack(), heat, 0.0) - atmos_rhs(s, prm, g, 0.0);
  EXPECT_NEAR(d.segment(3 * N, N).mean(), 3e-5, 1e-18);
  EXPECT_THROW(as_state_space(prm, g, {{Quantity::T, std::size_t(N)}}), DomainError);
}

TEST(Grid, Validation) {
  AtmosGrid g = box(2, 2, 1);
  EXPECT_THROW(g.validate(), DomainError);
  g = box(2, 2, 2);
  g.dz = 0.0;
  EXPECT_THROW(g.validate(), DomainError);
  AtmosState s = AtmosState::uniform(box(2, 2, 2), 288.0, 1.2);
  s.rho(3) = -1.0;
  EXPECT_THROW(s.validate(box(2, 2, 2)), DomainError);
}

TEST(Snapshot, CsvRoundTripsState) {
  const AtmosGrid g = box(3, 2, 2);
  const AtmosState s = testing::random_smooth_state(g, 21);
  const std::string text = snapshot_csv(s, g);
  EXPECT_EQ(text.substr(text.find('\n') + 1, 22), "i,j,k,vx,vy,vz,T,rho\n0");
  std::istringstream in(text);
  const AtmosState back = read_snapshot_csv(in, g);
  EXPECT_EQ(back.pack(), s.pack());
}

}  // namespace
}  // namespace climctl::atmos
