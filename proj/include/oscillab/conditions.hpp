#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oscillab/integrate.hpp"
#include "oscillab/quadrature.hpp"

namespace oscillab {

// ---------------------------------------------------------------------------
// Leading-order sinusoidal kernels (functions of the lag tau = t - s) and the
// oscillation algebra that reduces the kernel integrals to the normalized
// channels U, V.

struct LeadingKernels {
  double omega = 1.0;

  double L1(double tau) const {
    return omega * std::sin(omega * tau) + std::cos(omega * tau);
  }
  double L2(double tau) const {
    return omega * omega * std::cos(omega * tau) - omega * std::sin(omega * tau);
  }
  double L3(double tau) const {
    const double w2 = omega * omega;
    return (w2 * omega - omega) * std::sin(omega * tau) +
           2.0 * w2 * std::cos(omega * tau);
  }
  // Antiderivative pair of L1: d/ds F(t - s) = L1(t - s).
  double F(double tau) const {
    return std::cos(omega * tau) - std::sin(omega * tau) / omega;
  }
};

struct OscillationMatrix {
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  double det = 0;
};

/// M(t) carrying the L1/L2 expansion onto the (U, V) channels; its
/// determinant is the constant w(w^2+1).
inline OscillationMatrix oscillation_matrix(double omega, double t) {
  OscillationMatrix m;
  const double s = std::sin(omega * t), c = std::cos(omega * t);
  const double w2 = omega * omega;
  m.m00 = omega * s + c;
  m.m01 = s - omega * c;
  m.m10 = w2 * c - omega * s;
  m.m11 = w2 * s + omega * c;
  m.det = m.m00 * m.m11 - m.m01 * m.m10;
  return m;
}

struct ForcingTransform {
  double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
  double det = 0;
};

/// Constant matrix linking the forcing-weighted integrals to the
/// filter-weighted ones; det = w^2(w^2+1).
inline ForcingTransform forcing_transform(double omega) {
  if (omega == 0.0) throw std::invalid_argument("forcing_transform: omega == 0");
  ForcingTransform m;
  const double w2 = omega * omega;
  m.m00 = w2;
  m.m01 = omega;
  m.m10 = -omega;
  m.m11 = w2;
  m.det = m.m00 * m.m11 - m.m01 * m.m10;
  return m;
}

inline double forcing_transform_det(double omega) {
  return forcing_transform(omega).det;
}

struct CCoefficients {
  double C1 = 0, C2 = 0;
};

/// Oscillatory coefficients of the L3 expansion:
///   C1(t) = (w^3 - w) sin(wt) + 2 w^2 cos(wt),
///   C2(t) = 2 w^2 sin(wt) - (w^3 - w) cos(wt);
/// C1^2 + C2^2 = w^2 (w^2 + 1)^2 identically.
inline CCoefficients c_coefficients(double omega, double t) {
  const double w2 = omega * omega;
  const double a = w2 * omega - omega, b = 2.0 * w2;
  const double s = std::sin(omega * t), c = std::cos(omega * t);
  return {a * s + b * c, b * s - a * c};
}

// ---------------------------------------------------------------------------
// Limit estimates for the weighted integrals of y2

struct LimitEstimate {
  double Ic = 0.0;
  double Is = 0.0;
  double tail_bound = 0.0;  // last-decade increment of int A |y2|
  bool converged = false;
};

/// Reads off the running weighted integrals and classifies their convergence
/// by the last-decade increment of int A(s)|y2(s)| ds.
inline LimitEstimate estimate_limits(const Trajectory& tr) {
  if (tr.size() < 2) throw std::invalid_argument("estimate_limits: empty trajectory");
  LimitEstimate est;
  est.Ic = tr.ic_run.back();
  est.Is = tr.is_run.back();

  std::vector<double> integrand(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    integrand[i] = std::exp(tr.logA[i]) * std::abs(tr.y2[i]);
  const double split = tr.horizon() / 10.0;
  auto it = std::lower_bound(tr.t.begin(), tr.t.end(), split);
  const auto idx = static_cast<std::size_t>(it - tr.t.begin());
  est.tail_bound = integrate_sampled(
      std::span<const double>(integrand).subspan(idx), tr.spacing());
  est.converged =
      est.tail_bound < 0.01 * std::max({std::abs(est.Ic), std::abs(est.Is), 1.0});
  return est;
}

/// Sinusoid constants forced by the limits of the weighted integrals:
///   c1 = (w^3 - w) Ic + 2 w^2 Is,   c2 = 2 w^2 Ic - (w^3 - w) Is.
inline std::pair<double, double> predicted_constants(const LimitEstimate& est,
                                                     double omega) {
  if (!est.converged)
    throw std::invalid_argument("predicted_constants: estimate not converged");
  const double a = omega * omega * omega - omega, b = 2.0 * omega * omega;
  return {a * est.Ic + b * est.Is, b * est.Ic - a * est.Is};
}

// ---------------------------------------------------------------------------
// Weighted L3 state: A(t) W(t) = int A(s) L3(t-s) y2(s) ds

/// Direct quadrature route, O(j) per evaluation point.
inline double weighted_l3_direct(const Trajectory& tr, std::size_t j) {
  const LeadingKernels lk{tr.omega};
  std::vector<double> integrand(j + 1);
  for (std::size_t i = 0; i <= j; ++i)
    integrand[i] = std::exp(tr.logA[i]) * lk.L3(tr.t[j] - tr.t[i]) * tr.y2[i];
  return integrate_sampled(integrand, tr.spacing());
}

/// Channel route through the running integrals: C1(t) Ic(t) + C2(t) Is(t).
inline double weighted_l3_channels(const Trajectory& tr, std::size_t j) {
  const auto cc = c_coefficients(tr.omega, tr.t[j]);
  return cc.C1 * tr.ic_run[j] + cc.C2 * tr.is_run[j];
}

// ---------------------------------------------------------------------------
// Decay verdicts over dyadic windows

enum class Statement { A, B, C, D, S, T };

inline const char* to_string(Statement s) {
  switch (s) {
    case Statement::A: return "A";
    case Statement::B: return "B";
    case Statement::C: return "C";
    case Statement::D: return "D";
    case Statement::S: return "S";
    default: return "T";
  }
}

enum class VerdictResult { holds, fails, inconclusive };

inline const char* to_string(VerdictResult r) {
  switch (r) {
    case VerdictResult::holds: return "holds";
    case VerdictResult::fails: return "fails";
    default: return "inconclusive";
  }
}

struct ConditionVerdict {
  Statement statement = Statement::A;
  VerdictResult result = VerdictResult::inconclusive;
  std::map<std::string, double> evidence;
};

struct VerdictThresholds {
  double eps_conv = 0.05;       // final/first window-sup ratio for "holds"
  double eps_div = 0.5;         // final/first ratio floor for "fails"
  double slope_hold = -0.10;    // log-log window-sup slope required to hold
  double slope_fail = -0.05;    // slopes above this count as "no trend down"
  double monotone_slack = 1.02;
  std::size_t min_windows = 3;
  double min_periods = 20.0;
};

struct WindowTrend {
  std::vector<double> starts;
  std::vector<double> sups;
  double ratio = 0.0;
  double slope = 0.0;
  bool monotone = false;
  bool all_zero = false;
};

/// Sups of |values| over dyadic windows [T, 2T], T doubling from t0 + period.
inline WindowTrend window_trend(std::span<const double> times,
                                std::span<const double> values, double t0,
                                double omega, double monotone_slack = 1.02) {
  WindowTrend wt;
  const double period = 2.0 * kPi / std::abs(omega);
  const double horizon = times.back();
  for (double T = t0 + period; 2.0 * T <= horizon; T *= 2.0) {
    const auto lo = std::lower_bound(times.begin(), times.end(), T);
    const auto hi = std::upper_bound(times.begin(), times.end(), 2.0 * T);
    double sup = 0.0;
    for (auto it = lo; it != hi; ++it)
      sup = std::max(sup, std::abs(values[static_cast<std::size_t>(
                              it - times.begin())]));
    wt.starts.push_back(T);
    wt.sups.push_back(sup);
  }
  if (wt.sups.empty()) return wt;

  wt.all_zero = *std::max_element(wt.sups.begin(), wt.sups.end()) < 1e-280;
  if (wt.all_zero) {
    wt.ratio = 0.0;
    wt.slope = 0.0;
    wt.monotone = true;
    return wt;
  }
  wt.ratio = wt.sups.back() / std::max(wt.sups.front(), 1e-280);
  wt.monotone = true;
  for (std::size_t i = 0; i + 1 < wt.sups.size(); ++i)
    if (wt.sups[i + 1] > monotone_slack * wt.sups[i]) wt.monotone = false;
  // Least-squares slope of log sup against log T.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(wt.sups.size());
  for (std::size_t i = 0; i < wt.sups.size(); ++i) {
    const double x = std::log(wt.starts[i]);
    const double y = std::log(std::max(wt.sups[i], 1e-280));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  wt.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return wt;
}

namespace detail {

inline VerdictResult channel_verdict(const WindowTrend& wt,
                                     const VerdictThresholds& th) {
  if (wt.sups.size() < th.min_windows) return VerdictResult::inconclusive;
  if (wt.all_zero) return VerdictResult::holds;
  if (wt.monotone && wt.ratio < th.eps_conv && wt.slope < th.slope_hold)
    return VerdictResult::holds;
  if (wt.ratio > th.eps_div && wt.slope > th.slope_fail)
    return VerdictResult::fails;
  return VerdictResult::inconclusive;
}

inline VerdictResult combine(std::span<const VerdictResult> parts) {
  bool any_inconclusive = false;
  for (auto r : parts) {
    if (r == VerdictResult::fails) return VerdictResult::fails;
    if (r == VerdictResult::inconclusive) any_inconclusive = true;
  }
  return any_inconclusive ? VerdictResult::inconclusive : VerdictResult::holds;
}

}  // namespace detail

/// Three-valued decay verdicts for the six statements:
///   A: y1, U1, V1 -> 0      B: x, x' -> 0
///   C: y2, U2, V2 -> 0      D: x, x' -> 0
///   S: U1, V1 -> 0          T: forcing-weighted Uf, Vf -> 0
/// Limits are undecidable numerically; windows shrinking below eps_conv with
/// a definite downward trend hold, windows stuck above eps_div fail, anything
/// between is inconclusive.
inline std::vector<ConditionVerdict> statement_verdicts(
    const Trajectory& tr, const VerdictThresholds& th = {}) {
  std::vector<ConditionVerdict> out;
  const double periods = (tr.horizon() - tr.t0()) * tr.omega / (2.0 * kPi);
  const bool enough = periods >= th.min_periods;

  struct Channel {
    const char* name;
    const std::vector<double>* values;
  };
  auto eval = [&](Statement st, std::initializer_list<Channel> channels) {
    ConditionVerdict v;
    v.statement = st;
    if (!enough) {
      v.result = VerdictResult::inconclusive;
      v.evidence["periods"] = periods;
      out.push_back(std::move(v));
      return;
    }
    std::vector<VerdictResult> parts;
    for (const auto& ch : channels) {
      const auto wt =
          window_trend(tr.t, *ch.values, tr.t0(), tr.omega, th.monotone_slack);
      parts.push_back(detail::channel_verdict(wt, th));
      if (!wt.sups.empty()) {
        v.evidence[std::string(ch.name) + "_sup_first"] = wt.sups.front();
        v.evidence[std::string(ch.name) + "_sup_last"] = wt.sups.back();
        v.evidence[std::string(ch.name) + "_ratio"] = wt.ratio;
        v.evidence[std::string(ch.name) + "_slope"] = wt.slope;
      }
    }
    v.result = detail::combine(parts);
    out.push_back(std::move(v));
  };

  eval(Statement::A, {{"y1", &tr.y1}, {"U1", &tr.U1}, {"V1", &tr.V1}});
  eval(Statement::B, {{"x", &tr.x}, {"dx", &tr.dx}});
  eval(Statement::C, {{"y2", &tr.y2}, {"U2", &tr.U2}, {"V2", &tr.V2}});
  eval(Statement::D, {{"x", &tr.x}, {"dx", &tr.dx}});
  eval(Statement::S, {{"U1", &tr.U1}, {"V1", &tr.V1}});
  eval(Statement::T, {{"Uf", &tr.uf}, {"Vf", &tr.vf}});
  return out;
}

/// Definite verdicts for logically equivalent statements must not disagree.
inline bool equivalence_consistent(std::span<const ConditionVerdict> verdicts) {
  auto result_of = [&](Statement st) {
    for (const auto& v : verdicts)
      if (v.statement == st) return v.result;
    return VerdictResult::inconclusive;
  };
  auto compatible = [&](Statement a, Statement b) {
    const auto ra = result_of(a), rb = result_of(b);
    return !((ra == VerdictResult::holds && rb == VerdictResult::fails) ||
             (ra == VerdictResult::fails && rb == VerdictResult::holds));
  };
  return compatible(Statement::A, Statement::B) &&
         compatible(Statement::C, Statement::D) &&
         compatible(Statement::S, Statement::T);
}

}  // namespace oscillab
