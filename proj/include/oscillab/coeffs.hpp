#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "oscillab/quadrature.hpp"

namespace oscillab {

/// Damping coefficient p together with its derivative and accumulated
/// integral P(t) = int_{t0}^t p. All evaluations are analytic per family;
/// the accumulated integral backs the envelope weight
///   A(t) = exp(P(t)/2),  rho(t) = 1/A(t),  E(t,s) = A(s)/A(t).
struct DampingFamily {
  std::function<double(double)> p;
  std::function<double(double)> dp;
  std::function<double(double)> int_p;
  double t0 = 0.0;
  std::string descriptor;

  double log_weight(double t) const { return 0.5 * int_p(t); }
  double envelope_ratio(double t, double s) const {
    return std::exp(0.5 * (int_p(s) - int_p(t)));
  }
};

struct ForcingSpec {
  std::function<double(double)> f;
  std::string descriptor;
  // Exact first filter y1 (t0 = 0 convention), when known in closed form.
  std::function<double(double)> analytic_y1;
};

struct SystemSpec {
  double omega = 1.0;
  double xi0 = 0.0;
  double xi1 = 0.0;
  double t0 = 0.0;
};

/// Log-envelope samples along a grid: logA accumulated by per-interval
/// Gauss quadrature of p/2, logA(t0) = 0.
struct WeightState {
  std::vector<double> times;
  std::vector<double> logA;

  double A(std::size_t i) const { return std::exp(logA[i]); }
  double rho(std::size_t i) const { return std::exp(-logA[i]); }
};

// ---------------------------------------------------------------------------
// Built-in families

inline DampingFamily power_family(double alpha, double beta) {
  if (alpha <= 0.0 || beta <= 0.0)
    throw std::invalid_argument("power_family: alpha and beta must be > 0");
  DampingFamily fam;
  fam.t0 = 0.0;
  fam.descriptor = "power:a=" + std::to_string(alpha) + ",b=" + std::to_string(beta);
  fam.p = [alpha, beta](double t) { return alpha * std::pow(1.0 + t, -beta); };
  fam.dp = [alpha, beta](double t) {
    return -alpha * beta * std::pow(1.0 + t, -beta - 1.0);
  };
  if (beta == 1.0)
    fam.int_p = [alpha](double t) { return alpha * std::log1p(t); };
  else
    fam.int_p = [alpha, beta](double t) {
      return alpha * (std::pow(1.0 + t, 1.0 - beta) - 1.0) / (1.0 - beta);
    };
  return fam;
}

/// p(t) = 1/t on [1, inf); the damping of the Bessel equation of order zero.
inline DampingFamily bessel_family() {
  DampingFamily fam;
  fam.t0 = 1.0;
  fam.descriptor = "bessel";
  fam.p = [](double t) { return 1.0 / t; };
  fam.dp = [](double t) { return -1.0 / (t * t); };
  fam.int_p = [](double t) { return std::log(t); };
  return fam;
}

// Degenerate families for tests; they violate the hypothesis class on purpose.
inline DampingFamily constant_family(double c, double t0 = 0.0) {
  DampingFamily fam;
  fam.t0 = t0;
  fam.descriptor = "constant:c=" + std::to_string(c);
  fam.p = [c](double) { return c; };
  fam.dp = [](double) { return 0.0; };
  fam.int_p = [c, t0](double t) { return c * (t - t0); };
  return fam;
}

inline DampingFamily zero_family(double t0 = 0.0) {
  DampingFamily fam = constant_family(0.0, t0);
  fam.descriptor = "none";
  return fam;
}

// ---------------------------------------------------------------------------
// Built-in forcings

inline ForcingSpec zero_forcing() {
  ForcingSpec fs;
  fs.descriptor = "zero";
  fs.f = [](double) { return 0.0; };
  fs.analytic_y1 = [](double) { return 0.0; };
  return fs;
}

inline ForcingSpec power_decay_forcing(double g) {
  if (g <= 0.0) throw std::invalid_argument("power_decay_forcing: g must be > 0");
  ForcingSpec fs;
  fs.descriptor = "powerdecay:g=" + std::to_string(g);
  fs.f = [g](double t) { return std::pow(1.0 + t, -g); };
  return fs;
}

inline ForcingSpec exp_decay_forcing(double k) {
  ForcingSpec fs;
  fs.descriptor = "expdecay:k=" + std::to_string(k);
  fs.f = [k](double t) { return std::exp(-k * t); };
  return fs;
}

/// Forcing engineered so the first filter tracks a slowly decaying
/// resonant sinusoid: with w(t) = cos(omega t)(1+t)^-g and f = w' + omega^2 w,
/// the filter started at zero is y1(t) = w(t) - exp(-omega^2 t).
inline ForcingSpec resonant_forcing(double g, double omega) {
  if (g <= 0.0) throw std::invalid_argument("resonant_forcing: g must be > 0");
  ForcingSpec fs;
  fs.descriptor = "resonant:g=" + std::to_string(g);
  const double w2 = omega * omega;
  fs.f = [g, omega, w2](double t) {
    const double d = std::pow(1.0 + t, -g);
    const double wt = std::cos(omega * t) * d;
    const double dwt =
        -omega * std::sin(omega * t) * d - g * std::cos(omega * t) * d / (1.0 + t);
    return dwt + w2 * wt;
  };
  fs.analytic_y1 = [g, omega, w2](double t) {
    return std::cos(omega * t) * std::pow(1.0 + t, -g) - std::exp(-w2 * t);
  };
  return fs;
}

// ---------------------------------------------------------------------------
// Operations

/// Residual potential after removing the first-derivative term:
///   q(t) = -p(t)^2/4 - p'(t)/2.
inline double residual_potential(const DampingFamily& fam, double t) {
  if (t < fam.t0)
    throw std::domain_error("residual_potential: t below family start");
  const double pt = fam.p(t);
  return -0.25 * pt * pt - 0.5 * fam.dp(t);
}

enum class TailClass { convergent, inconclusive, divergent };

inline const char* to_string(TailClass c) {
  switch (c) {
    case TailClass::convergent: return "convergent";
    case TailClass::divergent: return "divergent";
    default: return "inconclusive";
  }
}

struct HypothesisReport {
  bool positive = false;            // p > 0 at all samples
  bool decreasing = false;          // p' < 0 at all samples
  bool derivative_consistent = false;  // p' matches finite differences
  bool derivative_vanishes = false;    // p'(horizon) small vs p'(t0)
  double int_p = 0.0;
  double int_p2 = 0.0;
  double int_absq = 0.0;
  TailClass int_p_class = TailClass::inconclusive;
  TailClass int_p2_class = TailClass::inconclusive;
  TailClass int_absq_class = TailClass::inconclusive;

  bool p_not_integrable() const { return int_p_class == TailClass::divergent; }
  bool p2_integrable() const { return int_p2_class == TailClass::convergent; }
  bool satisfies_all() const {
    return positive && decreasing && derivative_consistent &&
           p_not_integrable() && p2_integrable();
  }
};

namespace detail {

// Last-decade contribution heuristic: share of [H/10, H] in the total.
// > 20% => divergent, < 1% => convergent, otherwise inconclusive.
template <class F>
std::pair<double, TailClass> classify_improper(F&& f, double t0, double horizon) {
  const double split = std::max(t0, horizon / 10.0);
  const double head = integrate_adaptive(f, t0, split, 1e-12);
  const double tail = integrate_adaptive(f, split, horizon, 1e-12);
  const double total = head + tail;
  TailClass cls = TailClass::inconclusive;
  if (total > 0.0) {
    const double share = tail / total;
    if (share > 0.20)
      cls = TailClass::divergent;
    else if (share < 0.01)
      cls = TailClass::convergent;
  } else {
    cls = TailClass::convergent;  // identically zero integrand
  }
  return {total, cls};
}

}  // namespace detail

inline HypothesisReport validate_hypotheses(const DampingFamily& fam,
                                            double horizon,
                                            std::size_t samples) {
  if (horizon <= fam.t0)
    throw std::invalid_argument("validate_hypotheses: horizon <= t0");
  if (samples < 100)
    throw std::invalid_argument("validate_hypotheses: samples < 100");

  HypothesisReport rep;
  rep.positive = rep.decreasing = rep.derivative_consistent = true;
  for (std::size_t i = 0; i < samples; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(samples - 1);
    const double t = fam.t0 + (horizon - fam.t0) * u * u * u;  // cluster early
    const double pt = fam.p(t);
    const double dpt = fam.dp(t);
    if (!(pt > 0.0)) rep.positive = false;
    if (!(dpt < 0.0)) rep.decreasing = false;
    const double h = 1e-4 * (1.0 + std::abs(t));
    if (t - h >= fam.t0) {
      const double fd = (fam.p(t + h) - fam.p(t - h)) / (2.0 * h);
      const double scale = std::max(std::abs(dpt), 1e-30);
      if (std::abs(fd - dpt) > 1e-6 * scale) rep.derivative_consistent = false;
    }
  }
  rep.derivative_vanishes =
      std::abs(fam.dp(horizon)) < 0.01 * std::abs(fam.dp(fam.t0)) + 1e-300;

  auto p = [&fam](double t) { return fam.p(t); };
  auto p2 = [&fam](double t) { const double v = fam.p(t); return v * v; };
  auto absq = [&fam](double t) { return std::abs(residual_potential(fam, t)); };
  std::tie(rep.int_p, rep.int_p_class) =
      detail::classify_improper(p, fam.t0, horizon);
  std::tie(rep.int_p2, rep.int_p2_class) =
      detail::classify_improper(p2, fam.t0, horizon);
  std::tie(rep.int_absq, rep.int_absq_class) =
      detail::classify_improper(absq, fam.t0, horizon);
  return rep;
}

struct TailIntegral {
  double value = 0.0;       // int_s^inf |q|, extrapolated past the horizon
  double exponent = 0.0;    // fitted power-law decay rate of |q|
  bool tail_convergent = true;
};

/// Q(s) = int_s^inf |q|. Quadrature up to the horizon plus a power-law tail
/// fitted on the last decade (log-log slope).
inline TailIntegral tail_Q_detail(const DampingFamily& fam, double s,
                                  double horizon) {
  if (s < fam.t0 || s > horizon)
    throw std::invalid_argument("tail_Q: need t0 <= s <= horizon");
  auto absq = [&fam](double t) { return std::abs(residual_potential(fam, t)); };

  TailIntegral out;
  const double body = (s < horizon) ? integrate_adaptive(absq, s, horizon, 1e-14) : 0.0;

  // Fit |q(t)| ~ C t^-m on [horizon/10, horizon]; the decay of q is a
  // property of the family, so the fit window ignores s.
  const double lo = std::max(fam.t0 + 1e-9, horizon / 10.0);
  constexpr int kFit = 16;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < kFit; ++i) {
    const double t = lo * std::pow(horizon / lo, (i + 0.5) / kFit);
    const double v = absq(t);
    if (v <= 0.0) continue;
    const double x = std::log(t), y = std::log(v);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  double tail = 0.0;
  if (n >= 2) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double inter = (sy - slope * sx) / n;
    const double m = -slope;
    out.exponent = m;
    if (m > 1.0) {
      const double C = std::exp(inter);
      tail = C * std::pow(horizon, 1.0 - m) / (m - 1.0);
    } else {
      out.tail_convergent = false;
    }
  } else {
    out.exponent = std::numeric_limits<double>::infinity();  // |q| ~ 0
  }
  out.value = body + tail;
  return out;
}

inline double tail_Q(const DampingFamily& fam, double s, double horizon) {
  return tail_Q_detail(fam, s, horizon).value;
}

inline WeightState weight_logA(const DampingFamily& fam,
                               std::span<const double> grid) {
  if (grid.empty() || grid.front() != fam.t0)
    throw std::invalid_argument("weight_logA: grid must start at t0");
  WeightState ws;
  ws.times.assign(grid.begin(), grid.end());
  auto half_p = [&fam](double t) { return 0.5 * fam.p(t); };
  ws.logA = cumulative_gauss(half_p, grid);
  return ws;
}

}  // namespace oscillab
