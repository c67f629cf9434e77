#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oscillab/conditions.hpp"
#include "oscillab/scenario.hpp"

using namespace oscillab;

TEST_CASE("oscillation matrix determinant") {
  CHECK(oscillation_matrix(1.0, 3.7).det == Catch::Approx(2.0).margin(1e-14));
  CHECK(oscillation_matrix(2.0, 0.7).det == Catch::Approx(10.0).margin(1e-12));
  const auto m = oscillation_matrix(1.0, 0.0);
  CHECK(m.m00 == 1.0);
  CHECK(m.m01 == -1.0);
  CHECK(m.m10 == 1.0);
  CHECK(m.m11 == 1.0);

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> uw(0.5, 5.0), ut(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double w = uw(rng), t = ut(rng);
    const double expect = w * (w * w + 1.0);
    CHECK(std::abs(oscillation_matrix(w, t).det - expect) <= 1e-12 * expect);
  }
}

TEST_CASE("forcing transform") {
  CHECK(forcing_transform_det(1.0) == 2.0);
  CHECK(forcing_transform_det(2.0) == 20.0);
  const auto m = forcing_transform(1.5);
  CHECK(m.m00 == 2.25);
  CHECK(m.m01 == 1.5);
  CHECK(m.m10 == -1.5);
  CHECK(m.m11 == 2.25);
  CHECK_THROWS_AS(forcing_transform(0.0), std::invalid_argument);
}

TEST_CASE("oscillatory coefficient pair") {
  SECTION("value at the origin") {
    const auto cc = c_coefficients(1.0, 0.0);
    CHECK(cc.C1 == 2.0);
    CHECK(cc.C2 == 0.0);  // omega^3 - omega vanishes at omega = 1
    CHECK(cc.C1 * cc.C1 + cc.C2 * cc.C2 == Catch::Approx(4.0).margin(1e-14));
  }
  SECTION("norm identity and quarter-period shift") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uw(0.5, 5.0), ut(0.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
      const double w = uw(rng), t = ut(rng);
      const auto cc = c_coefficients(w, t);
      const double target = w * w * (w * w + 1.0) * (w * w + 1.0);
      CHECK(std::abs(cc.C1 * cc.C1 + cc.C2 * cc.C2 - target) <= 1e-12 * target);
      const auto shifted = c_coefficients(w, t + kPi / (2.0 * w));
      CHECK(std::abs(shifted.C1 + cc.C2) <= 1e-12 * std::sqrt(target));
      CHECK(std::abs(shifted.C2 - cc.C1) <= 1e-12 * std::sqrt(target));
    }
  }
}

TEST_CASE("leading kernels at zero lag and the antiderivative relation") {
  for (double w : {0.7, 1.0, 2.5}) {
    const LeadingKernels lk{w};
    CHECK(lk.L1(0.0) == 1.0);
    CHECK(lk.L2(0.0) == w * w);
    CHECK(lk.L3(0.0) == 2.0 * w * w);
    CHECK(lk.F(0.0) == 1.0);
    // d/ds F(t - s) = L1(t - s), i.e. F'(tau) = -L1(tau).
    const double h = 1e-5;
    for (double tau : {0.3, 1.7, 4.4}) {
      const double fd = (lk.F(tau + h) - lk.F(tau - h)) / (2.0 * h);
      CHECK(std::abs(fd + lk.L1(tau)) < 1e-8);
    }
  }
}

namespace {

Trajectory run_builtin(const char* name, double horizon) {
  const auto* cfg = find_builtin(name);
  REQUIRE(cfg != nullptr);
  auto c = *cfg;
  c.horizon = horizon;
  const auto sys = make_system(c);
  const auto grid = Grid::for_oscillator(sys.family.t0, sys.horizon, c.omega);
  return integrate_forced(sys.spec, sys.family, sys.forcing, grid, c.tol);
}

}  // namespace

TEST_CASE("limit estimates") {
  SECTION("zero forcing: both limits vanish and converge") {
    const auto tr = run_builtin("power-unforced", 3000.0);
    const auto est = estimate_limits(tr);
    CHECK(est.Ic == 0.0);
    CHECK(est.Is == 0.0);
    CHECK(est.converged);
  }
  SECTION("resonant forcing: increment plateau, not converged") {
    const auto tr = run_builtin("resonant-counterexample", 4000.0);
    const auto est = estimate_limits(tr);
    CHECK_FALSE(est.converged);
    CHECK(est.tail_bound > 1.0);
  }
  SECTION("decaying forcing: tail bound shrinks like 1/sqrt(T)") {
    const auto est1 = estimate_limits(run_builtin("power-decay", 4000.0));
    const auto est2 = estimate_limits(run_builtin("power-decay", 16000.0));
    CHECK(est2.tail_bound / est1.tail_bound == Catch::Approx(0.5).margin(0.1));
    CHECK(std::abs(est2.Ic - est1.Ic) < 1e-3);
    CHECK(std::abs(est2.Is - est1.Is) < 1e-3);
  }
}

TEST_CASE("predicted sinusoid constants") {
  LimitEstimate est;
  est.converged = true;
  est.Ic = 1.0;
  est.Is = 0.0;
  CHECK(predicted_constants(est, 1.0) == std::pair{0.0, 2.0});
  est.Ic = 0.0;
  est.Is = 1.0;
  CHECK(predicted_constants(est, 2.0) == std::pair{8.0, -6.0});
  est.Is = 0.0;
  CHECK(predicted_constants(est, 1.7) == std::pair{0.0, 0.0});
  est.converged = false;
  CHECK_THROWS_AS(predicted_constants(est, 1.0), std::invalid_argument);
}

TEST_CASE("weighted L3 state: direct quadrature equals the channel route") {
  SystemSpec spec;
  spec.omega = 1.0;
  const auto fam = power_family(1.0, 1.0);
  const std::size_t n = 5001;
  const Grid grid{0.0, 50.0, n};
  const auto tr =
      integrate_forced(spec, fam, power_decay_forcing(2.0), grid, 1e-12);
  double scale = 0.0, worst = 0.0;
  for (std::size_t j = 500; j < tr.size(); j += 500) {
    const double direct = weighted_l3_direct(tr, j);
    const double chan = weighted_l3_channels(tr, j);
    worst = std::max(worst, std::abs(direct - chan));
    scale = std::max(scale, std::abs(chan));
  }
  CHECK(worst <= 1e-8 * scale);
}

TEST_CASE("statement verdicts on the built-in scenarios") {
  SECTION("unforced bessel: everything decays") {
    const auto tr = run_builtin("bessel-unforced", 20000.0);
    const auto verdicts = statement_verdicts(tr);
    REQUIRE(verdicts.size() == 6);
    for (const auto& v : verdicts) CHECK(v.result == VerdictResult::holds);
    CHECK(equivalence_consistent(verdicts));
  }
  SECTION("resonant counterexample: both sides of the equivalence fail") {
    const auto tr = run_builtin("resonant-counterexample", 20000.0);
    const auto verdicts = statement_verdicts(tr);
    auto result_of = [&](Statement st) {
      for (const auto& v : verdicts)
        if (v.statement == st) return v.result;
      return VerdictResult::inconclusive;
    };
    CHECK(result_of(Statement::C) == VerdictResult::fails);
    CHECK(result_of(Statement::D) == VerdictResult::fails);
    CHECK(result_of(Statement::S) == VerdictResult::fails);
    CHECK(result_of(Statement::T) == VerdictResult::fails);
    CHECK(equivalence_consistent(verdicts));
  }
  SECTION("short horizons are inconclusive") {
    SystemSpec spec;
    spec.omega = 1.0;
    const auto fam = power_family(1.0, 1.0);
    const auto grid = Grid::for_oscillator(0.0, 60.0, 1.0);
    const auto tr = integrate_forced(spec, fam, zero_forcing(), grid, 1e-10);
    for (const auto& v : statement_verdicts(tr))
      CHECK(v.result == VerdictResult::inconclusive);
  }
}

TEST_CASE("verdict evidence sits between the thresholds when inconclusive") {
  // A channel decaying too slowly for eps_conv but with a clear downward
  // trend must come back inconclusive, not definite.
  VerdictThresholds th;
  std::vector<double> ts, vals;
  for (double t = 0.0; t <= 4000.0; t += 0.15) {
    ts.push_back(t);
    vals.push_back(std::cos(t) / std::pow(1.0 + t, 0.18));
  }
  const auto wt = window_trend(ts, vals, 0.0, 1.0, th.monotone_slack);
  CHECK(wt.ratio > th.eps_conv);
  CHECK(wt.ratio < th.eps_div);
  const auto r = detail::channel_verdict(wt, th);
  CHECK(r == VerdictResult::inconclusive);
}
