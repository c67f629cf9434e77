#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oscillab/integrate.hpp"
#include "oscillab/quadrature.hpp"
#include "support/oracles.hpp"

using namespace oscillab;

namespace {

SystemSpec bessel_start() {
  SystemSpec spec;
  spec.omega = 1.0;
  spec.xi0 = oracles::j0(1.0);
  spec.xi1 = -oracles::j1(1.0);
  spec.t0 = 1.0;
  return spec;
}

}  // namespace

TEST_CASE("unforced bessel start follows J0") {
  const auto fam = bessel_family();
  const auto grid = Grid::for_oscillator(1.0, 100.0, 1.0);
  const auto tr = integrate_forced(bessel_start(), fam, zero_forcing(), grid, 1e-12);

  CHECK(tr.x.front() == oracles::j0(1.0));
  CHECK(tr.dx.front() == -oracles::j1(1.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i)
    worst = std::max(worst, std::abs(tr.x[i] - oracles::j0(tr.t[i])));
  CHECK(worst < 1e-8);
}

TEST_CASE("zero forcing leaves every filter channel at zero") {
  const auto fam = power_family(1.0, 1.0);
  SystemSpec spec;
  spec.omega = 1.0;
  spec.xi0 = 0.7;
  spec.xi1 = -0.2;
  const auto grid = Grid::for_oscillator(0.0, 80.0, 1.0);
  const auto tr = integrate_forced(spec, fam, zero_forcing(), grid, 1e-10);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.y1[i] == 0.0);
    CHECK(tr.y2[i] == 0.0);
    CHECK(tr.U1[i] == 0.0);
    CHECK(tr.V2[i] == 0.0);
    CHECK(tr.ic_run[i] == 0.0);
  }
}

TEST_CASE("exponential forcing reproduces the filter kernel") {
  const double omega = 1.0;
  const auto fam = power_family(1.0, 1.0);
  SystemSpec spec;
  spec.omega = omega;
  const auto grid = Grid::for_oscillator(0.0, 30.0, omega);
  const auto tr = integrate_forced(spec, fam, exp_decay_forcing(omega * omega),
                                   grid, 1e-12);
  double worst1 = 0.0, worst2 = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.t[i];
    const double h = t * std::exp(-omega * omega * t);
    worst1 = std::max(worst1, std::abs(tr.y1[i] - h));
    worst2 = std::max(worst2, std::abs(tr.y2[i] - 0.5 * t * h));
  }
  CHECK(worst1 < 1e-9);  // y1 = t e^{-w^2 t}
  CHECK(worst2 < 1e-9);  // y2 = t^2 e^{-w^2 t} / 2
}

TEST_CASE("transformed-equation crosscheck") {
  SECTION("bessel, unforced") {
    const auto grid = Grid::for_oscillator(1.0, 100.0, 1.0);
    const double disc = integrate_undamped_crosscheck(
        bessel_start(), bessel_family(), zero_forcing(), grid, 1e-11);
    CHECK(disc < 1e-7);
  }
  SECTION("identically zero solution") {
    SystemSpec spec;
    spec.omega = 1.0;
    const auto grid = Grid::for_oscillator(0.0, 50.0, 1.0);
    const double disc = integrate_undamped_crosscheck(
        spec, power_family(1.0, 1.0), zero_forcing(), grid, 1e-10);
    CHECK(disc == 0.0);
  }
  SECTION("power family with decaying forcing") {
    SystemSpec spec;
    spec.omega = 1.0;
    const auto grid = Grid::for_oscillator(0.0, 50.0, 1.0);
    const double disc = integrate_undamped_crosscheck(
        spec, power_family(1.0, 1.0), power_decay_forcing(2.0), grid, 1e-11);
    CHECK(disc < 1e-7);
  }
  SECTION("weight overflow aborts with a diagnostic") {
    SystemSpec spec;
    spec.omega = 1.0;
    spec.xi0 = 1.0;
    const auto grid = Grid::for_oscillator(0.0, 100.0, 1.0);
    CHECK_THROWS_AS(integrate_undamped_crosscheck(spec, constant_family(8.0),
                                                  zero_forcing(), grid, 1e-10),
                    IntegrationError);
  }
}

TEST_CASE("refinement reduces error and the step order is at least 4") {
  const auto fam = bessel_family();
  const auto grid = Grid::for_oscillator(1.0, 20.0, 1.0);
  auto err_at = [&](double tol) {
    const auto tr = integrate_forced(bessel_start(), fam, zero_forcing(), grid, tol);
    const auto ref =
        integrate_forced(bessel_start(), fam, zero_forcing(), grid, tol / 100.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
      worst = std::max(worst, std::abs(tr.x[i] - ref.x[i]));
    return worst;
  };
  const double e1 = err_at(1e-6);
  const double e2 = err_at(5e-7);
  CHECK(e2 < e1);

  // Fixed-step convergence on the transformed equation.
  const double w2 = 1.0;
  auto rhs = [&](double t, const RkState<2>& y, RkState<2>& d) {
    d[0] = y[1];
    d[1] = -(w2 + residual_potential(fam, t)) * y[0];
  };
  const RkState<2> y0{oracles::j0(1.0), -oracles::j1(1.0) + 0.5 * oracles::j0(1.0)};
  auto fixed_err = [&](std::size_t n) {
    const auto y = rk_fixed_steps<2>(rhs, 1.0, y0, 11.0, n);
    const auto yref = rk_fixed_steps<2>(rhs, 1.0, y0, 11.0, 16 * n);
    return std::abs(y[0] - yref[0]);
  };
  const double eh = fixed_err(100);
  const double eh2 = fixed_err(200);
  const double order = std::log2(eh / eh2);
  CHECK(order >= 4.0);
}

TEST_CASE("transformed energy drifts only through the potential derivative") {
  // E_u = u'^2 + (w^2+q) u^2 changes at rate q' u^2; certify the loose
  // factor-2 bound |E_u(t) - E_u(t0)| <= 2 int |q'| u^2.
  const auto fam = bessel_family();
  const double w2 = 1.0;
  auto rhs = [&](double t, const RkState<2>& y, RkState<2>& d) {
    d[0] = y[1];
    d[1] = -(w2 + residual_potential(fam, t)) * y[0];
  };
  const auto spec = bessel_start();
  const RkState<2> y0{spec.xi0, spec.xi1 + 0.5 * fam.p(1.0) * spec.xi0};
  std::vector<double> ts;
  for (double t = 1.0; t <= 50.0; t += 0.02) ts.push_back(t);
  std::vector<double> u(ts.size()), du(ts.size());
  rk_integrate<2>(rhs, 1.0, y0, ts.back(), 1e-12, 1e-12, ts,
                  [&](std::size_t i, double, const RkState<2>& y) {
                    u[i] = y[0];
                    du[i] = y[1];
                  },
                  kPi);
  auto energy = [&](std::size_t i) {
    return du[i] * du[i] + (w2 + residual_potential(fam, ts[i])) * u[i] * u[i];
  };
  std::vector<double> integrand(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double qprime = -0.5 / (ts[i] * ts[i] * ts[i]);  // d/dt (1/(4t^2))
    integrand[i] = std::abs(qprime) * u[i] * u[i];
  }
  const auto cum = cumulative_sampled(integrand, ts[1] - ts[0]);
  const double e0 = energy(0);
  for (std::size_t i = 1; i < ts.size(); i += 50)
    CHECK(std::abs(energy(i) - e0) <= 2.0 * cum[i] + 1e-12);
}

TEST_CASE("normalized channel matches direct quadrature of the raw integral") {
  SystemSpec spec;
  spec.omega = 1.0;
  const auto fam = power_family(1.0, 1.0);
  const std::size_t n = 5001;
  const Grid grid{0.0, 50.0, n};
  const auto tr =
      integrate_forced(spec, fam, power_decay_forcing(2.0), grid, 1e-12);
  std::vector<double> integrand(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    integrand[i] = std::cos(tr.t[i]) * std::exp(tr.logA[i]) * tr.y2[i];
  const auto cum = cumulative_sampled(integrand, tr.spacing());
  for (std::size_t i = 500; i < tr.size(); i += 500) {
    const double au2 = std::exp(tr.logA[i]) * tr.U2[i];
    CHECK(std::abs(au2 - cum[i]) <= 1e-7 * std::max(1.0, std::abs(au2)));
    CHECK(std::abs(tr.ic_run[i] - cum[i]) <= 1e-7 * std::max(1.0, std::abs(cum[i])));
  }
}

TEST_CASE("grid and tolerance preconditions") {
  SystemSpec spec;
  spec.omega = 1.0;
  const auto fam = power_family(1.0, 1.0);
  CHECK_THROWS_AS(
      integrate_forced(spec, fam, zero_forcing(), Grid{0.0, 100.0, 101}, 1e-10),
      std::invalid_argument);  // spacing 1.0 > period/40
  const auto grid = Grid::for_oscillator(0.0, 50.0, 1.0);
  CHECK_THROWS_AS(integrate_forced(spec, fam, zero_forcing(), grid, 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate_forced(spec, fam, zero_forcing(), grid, 1e-14),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate_forced(spec, bessel_family(), zero_forcing(), grid,
                                   1e-10),
                  std::invalid_argument);  // grid does not start at t0
}
