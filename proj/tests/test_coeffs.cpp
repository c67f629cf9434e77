#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oscillab/coeffs.hpp"
#include "oscillab/integrate.hpp"

using namespace oscillab;

TEST_CASE("residual potential matches symbolic substitution") {
  const auto bessel = bessel_family();
  // p = 1/t: q = -1/(4t^2) + 1/(2t^2) = 1/(4t^2)
  CHECK(residual_potential(bessel, 2.0) == Catch::Approx(0.0625).margin(1e-15));

  const auto flat = constant_family(2.0);
  CHECK(residual_potential(flat, 5.0) == Catch::Approx(-1.0).margin(1e-15));
  const auto flat_half = constant_family(0.5);
  CHECK(residual_potential(flat_half, 0.0) ==
        Catch::Approx(-0.0625).margin(1e-16));

  const auto pw = power_family(1.0, 1.0);
  CHECK(residual_potential(pw, 0.0) == Catch::Approx(0.25).margin(1e-15));

  CHECK_THROWS_AS(residual_potential(bessel, 0.5), std::domain_error);
}

TEST_CASE("residual potential agrees with finite differences of p") {
  for (const auto& fam : {bessel_family(), power_family(1.0, 1.0),
                          power_family(2.0, 0.75)}) {
    for (double t = fam.t0 + 0.5; t < fam.t0 + 300.0; t *= 1.7) {
      const double h = 1e-5 * (1.0 + t);
      const double fd = (fam.p(t + h) - fam.p(t - h)) / (2.0 * h);
      const double q_fd = -0.25 * fam.p(t) * fam.p(t) - 0.5 * fd;
      const double q = residual_potential(fam, t);
      CHECK(std::abs(q - q_fd) <= 1e-6 * std::max(std::abs(q), 1e-12));
    }
  }
}

TEST_CASE("hypothesis validation classifies the example families") {
  SECTION("p = 1/(1+t): in the admissible class") {
    const auto rep = validate_hypotheses(power_family(1.0, 1.0), 1e4, 200);
    CHECK(rep.positive);
    CHECK(rep.decreasing);
    CHECK(rep.derivative_consistent);
    CHECK(rep.int_p_class == TailClass::divergent);
    CHECK(rep.int_p2_class == TailClass::convergent);
    CHECK(rep.int_absq_class == TailClass::convergent);
    CHECK(rep.satisfies_all());
    CHECK(rep.derivative_vanishes);
    // closed forms: log(1+T) and T/(1+T)
    CHECK(rep.int_p == Catch::Approx(std::log(1.0 + 1e4)).epsilon(1e-8));
    CHECK(rep.int_p2 == Catch::Approx(1e4 / (1.0 + 1e4)).epsilon(1e-8));
  }
  SECTION("p = 1/(1+t)^2: integrable damping violates non-integrability") {
    const auto rep = validate_hypotheses(power_family(1.0, 2.0), 1e4, 200);
    CHECK(rep.int_p_class == TailClass::convergent);
    CHECK_FALSE(rep.p_not_integrable());
    CHECK_FALSE(rep.satisfies_all());
    CHECK(rep.int_p == Catch::Approx(1.0 - 1.0 / (1.0 + 1e4)).epsilon(1e-8));
  }
  SECTION("p = 1/sqrt(1+t): square not integrable") {
    const auto rep = validate_hypotheses(power_family(1.0, 0.5), 1e4, 200);
    CHECK(rep.int_p_class == TailClass::divergent);
    CHECK(rep.int_p2_class == TailClass::divergent);
    CHECK_FALSE(rep.p2_integrable());
    CHECK_FALSE(rep.satisfies_all());
    CHECK(rep.int_p ==
          Catch::Approx(2.0 * (std::sqrt(1.0 + 1e4) - 1.0)).epsilon(1e-8));
  }
  CHECK_THROWS_AS(validate_hypotheses(power_family(1.0, 1.0), 1e4, 50),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_hypotheses(bessel_family(), 0.5, 200),
                  std::invalid_argument);
}

TEST_CASE("tail integral of |q| against closed forms") {
  const auto bessel = bessel_family();
  // q = 1/(4 t^2), so Q(s) = 1/(4s)
  CHECK(tail_Q(bessel, 2.0, 1e4) == Catch::Approx(0.125).margin(1e-9));
  CHECK(tail_Q(bessel, 1.0, 1e4) == Catch::Approx(0.25).margin(1e-9));

  const auto pw = power_family(1.0, 1.0);
  // q = 1/(4 (1+t)^2), so Q(s) = 1/(4(1+s))
  CHECK(tail_Q(pw, 3.0, 1e4) == Catch::Approx(1.0 / 16.0).margin(1e-9));

  SECTION("monotone nonincreasing in s") {
    double prev = tail_Q(bessel, 1.0, 1e4);
    for (double s : {2.0, 4.0, 8.0, 32.0, 128.0}) {
      const double q = tail_Q(bessel, s, 1e4);
      CHECK(q <= prev + 1e-12);
      prev = q;
    }
  }
  SECTION("at s = horizon only the extrapolated tail remains") {
    const double q1 = tail_Q(bessel, 1e3, 1e3);
    CHECK(q1 == Catch::Approx(0.25e-3).epsilon(1e-3));
    CHECK(tail_Q(bessel, 1e4, 1e4) < q1);
  }
  SECTION("slow tails are reported as non-convergent") {
    // |q| ~ 1/(4t) has extrapolation exponent 1
    DampingFamily slow;
    slow.t0 = 1.0;
    slow.descriptor = "slow";
    slow.p = [](double t) { return std::pow(t, -0.5); };
    slow.dp = [](double t) { return -0.5 * std::pow(t, -1.5); };
    slow.int_p = [](double t) { return 2.0 * (std::sqrt(t) - 1.0); };
    const auto rep = tail_Q_detail(slow, 1.0, 1e4);
    CHECK(rep.exponent == Catch::Approx(1.0).margin(0.05));
    CHECK_FALSE(rep.tail_convergent);
  }
}

TEST_CASE("log-envelope accumulation along a grid") {
  SECTION("bessel: A(4) = 2") {
    const auto grid = Grid::for_oscillator(1.0, 16.0, 1.0).times();
    const auto ws = weight_logA(bessel_family(), grid);
    CHECK(ws.logA.front() == 0.0);
    // locate t = 4 exactly via the closed form logA = log(t)/2
    for (std::size_t i = 0; i < ws.times.size(); ++i) {
      CHECK(std::abs(ws.logA[i] - 0.5 * std::log(ws.times[i] == 0.0 ? 1.0 : ws.times[i]))
            < 1e-12);
    }
  }
  SECTION("power beta=1: A(t)^2 (1+t0) = 1+t within 1e-10") {
    const auto grid = Grid::for_oscillator(0.0, 200.0, 1.0).times();
    const auto ws = weight_logA(power_family(1.0, 1.0), grid);
    for (std::size_t i = 0; i < ws.times.size(); ++i) {
      const double lhs = std::exp(2.0 * ws.logA[i]);
      CHECK(std::abs(lhs - (1.0 + ws.times[i])) < 1e-10 * (1.0 + ws.times[i]));
    }
    CHECK(std::exp(ws.logA[0]) == 1.0);
  }
  SECTION("rho * A = 1") {
    const auto grid = Grid::for_oscillator(0.0, 60.0, 1.0).times();
    const auto ws = weight_logA(power_family(1.5, 0.8), grid);
    for (std::size_t i = 0; i < ws.times.size(); i += 97)
      CHECK(std::abs(ws.rho(i) * ws.A(i) - 1.0) < 1e-14);
  }
  SECTION("grid must start at t0") {
    const auto grid = Grid::for_oscillator(0.0, 10.0, 1.0).times();
    CHECK_THROWS_AS(weight_logA(bessel_family(), grid), std::invalid_argument);
  }
}

TEST_CASE("resonant forcing carries its exact filter") {
  const double omega = 1.3;
  const auto fs = resonant_forcing(0.5, omega);
  REQUIRE(fs.analytic_y1);
  // y1' = -omega^2 y1 + f along the closed form, checked by differencing.
  for (double t : {0.5, 2.0, 7.0, 30.0}) {
    const double h = 1e-6;
    const double dy = (fs.analytic_y1(t + h) - fs.analytic_y1(t - h)) / (2.0 * h);
    const double rhs = -omega * omega * fs.analytic_y1(t) + fs.f(t);
    CHECK(std::abs(dy - rhs) < 1e-7);
  }
  CHECK(fs.analytic_y1(0.0) == Catch::Approx(0.0).margin(1e-15));
}
