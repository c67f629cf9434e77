#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscillab/conditions.hpp"
#include "oscillab/integrate.hpp"

namespace oscillab {

struct EnvelopeFit {
  double window_lo = 0.0, window_hi = 0.0;
  double c_sin = 0.0, c_cos = 0.0;
  double residual_rms = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  // atan2(c_cos, c_sin)
};

/// Least-squares fit of A(t) x(t) onto {sin(wt), cos(wt)} over a window
/// covering at least 10 periods.
inline EnvelopeFit envelope_fit(const Trajectory& tr, double lo, double hi) {
  if (lo < tr.t0() - 1e-9 || hi > tr.horizon() + 1e-9 || hi <= lo)
    throw std::invalid_argument("envelope_fit: window outside trajectory");
  if ((hi - lo) * tr.omega / (2.0 * kPi) < 10.0)
    throw std::invalid_argument("envelope_fit: window shorter than 10 periods");

  const auto first = std::lower_bound(tr.t.begin(), tr.t.end(), lo);
  const auto last = std::upper_bound(tr.t.begin(), tr.t.end(), hi);
  const auto i0 = static_cast<std::size_t>(first - tr.t.begin());
  const auto i1 = static_cast<std::size_t>(last - tr.t.begin());

  double sss = 0, ssc = 0, scc = 0, bs = 0, bc = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double s = std::sin(tr.omega * tr.t[i]);
    const double c = std::cos(tr.omega * tr.t[i]);
    const double z = std::exp(tr.logA[i]) * tr.x[i];
    sss += s * s; ssc += s * c; scc += c * c;
    bs += z * s; bc += z * c;
  }
  const double det = sss * scc - ssc * ssc;

  EnvelopeFit fit;
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.c_sin = (bs * scc - bc * ssc) / det;
  fit.c_cos = (bc * sss - bs * ssc) / det;
  double acc = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double z = std::exp(tr.logA[i]) * tr.x[i];
    const double r = z - fit.c_sin * std::sin(tr.omega * tr.t[i]) -
                     fit.c_cos * std::cos(tr.omega * tr.t[i]);
    acc += r * r;
  }
  fit.residual_rms = std::sqrt(acc / static_cast<double>(i1 - i0));
  fit.amplitude = std::hypot(fit.c_sin, fit.c_cos);
  fit.phase = std::atan2(fit.c_cos, fit.c_sin);
  return fit;
}

struct PreservationReport {
  bool y2_small_o = false;   // window sups of A|y2| trend to zero
  bool fits_agree = false;   // two disjoint late-window fits match
  bool preserved = false;
  EnvelopeFit first_fit, second_fit;
  double amplitude_drift = 0.0;
  double phase_drift = 0.0;
  std::vector<double> ay2_sups;
  // Partial prediction for the weighted L3 state, when the limits converged.
  bool w_prediction_available = false;
  double w_pred_c1 = 0.0, w_pred_c2 = 0.0;
  double w_fit_sin = 0.0, w_fit_cos = 0.0;
};

namespace detail {

inline double phase_gap(double a, double b) {
  return std::abs(std::atan2(std::sin(a - b), std::cos(a - b)));
}

}  // namespace detail

/// Checks whether the forced state keeps the unforced leading-order shape:
/// (i) A(t)|y2(t)| dies out across dyadic windows, (ii) sinusoid fits of
/// A(t) x(t) on two disjoint late windows agree in amplitude (5%) and phase
/// (0.05 rad). When the weighted-integral limits converged, the report also
/// carries the predicted sinusoid constants of the weighted L3 state next to
/// a fitted counterpart.
inline PreservationReport preservation_check(const Trajectory& tr,
                                             const LimitEstimate& est) {
  PreservationReport rep;

  std::vector<double> ay2(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    ay2[i] = std::exp(tr.logA[i]) * std::abs(tr.y2[i]);
  const auto wt = window_trend(tr.t, ay2, tr.t0(), tr.omega, 1.02);
  rep.ay2_sups = wt.sups;
  rep.y2_small_o = wt.all_zero ||
                   (wt.sups.size() >= 3 && wt.monotone &&
                    wt.sups.back() < 0.1 * wt.sups.front());

  const double t0 = tr.t0(), H = tr.horizon();
  const double q1 = t0 + 0.25 * (H - t0), mid = t0 + 0.5 * (H - t0);
  rep.first_fit = envelope_fit(tr, q1, mid);
  rep.second_fit = envelope_fit(tr, mid, H);
  rep.amplitude_drift =
      std::abs(rep.first_fit.amplitude - rep.second_fit.amplitude) /
      std::max(rep.first_fit.amplitude, 1e-300);
  rep.phase_drift = detail::phase_gap(rep.first_fit.phase, rep.second_fit.phase);
  const bool zero_state =
      rep.first_fit.amplitude < 1e-280 && rep.second_fit.amplitude < 1e-280;
  rep.fits_agree =
      zero_state || (rep.amplitude_drift < 0.05 && rep.phase_drift < 0.05);
  rep.preserved = rep.y2_small_o && rep.fits_agree;

  if (est.converged) {
    rep.w_prediction_available = true;
    const double a = tr.omega * tr.omega * tr.omega - tr.omega;
    const double b = 2.0 * tr.omega * tr.omega;
    rep.w_pred_c1 = a * est.Ic + b * est.Is;
    rep.w_pred_c2 = b * est.Ic - a * est.Is;
    // Fit the channel form of A(t) W(t) on the second window.
    double sss = 0, ssc = 0, scc = 0, bs = 0, bc = 0;
    const auto first = std::lower_bound(tr.t.begin(), tr.t.end(), mid);
    for (auto it = first; it != tr.t.end(); ++it) {
      const auto i = static_cast<std::size_t>(it - tr.t.begin());
      const double s = std::sin(tr.omega * tr.t[i]);
      const double c = std::cos(tr.omega * tr.t[i]);
      const double z = weighted_l3_channels(tr, i);
      sss += s * s; ssc += s * c; scc += c * c;
      bs += z * s; bc += z * c;
    }
    const double det = sss * scc - ssc * ssc;
    rep.w_fit_sin = (bs * scc - bc * ssc) / det;
    rep.w_fit_cos = (bc * sss - bs * ssc) / det;
  }
  return rep;
}

struct ConverseReport {
  bool sin_converged = false;
  bool cos_converged = false;
  std::vector<double> checkpoints;
  std::vector<double> sin_increments;
  std::vector<double> cos_increments;
};

/// Examines the running weighted integrals of y2 at dyadic checkpoints;
/// converged means the increments at least halve per doubling.
inline ConverseReport converse_check(const Trajectory& tr) {
  ConverseReport rep;
  const double period = 2.0 * kPi / tr.omega;
  std::vector<std::size_t> idx;
  for (double T = tr.t0() + period; T <= tr.horizon(); T *= 2.0) {
    const auto it = std::lower_bound(tr.t.begin(), tr.t.end(), T);
    if (it == tr.t.end()) break;
    idx.push_back(static_cast<std::size_t>(it - tr.t.begin()));
    rep.checkpoints.push_back(tr.t[idx.back()]);
  }
  if (idx.size() < 3) return rep;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    rep.sin_increments.push_back(tr.is_run[idx[k + 1]] - tr.is_run[idx[k]]);
    rep.cos_increments.push_back(tr.ic_run[idx[k + 1]] - tr.ic_run[idx[k]]);
  }
  const double floor_s = 1e-12 * std::max(1.0, std::abs(tr.is_run.back()));
  const double floor_c = 1e-12 * std::max(1.0, std::abs(tr.ic_run.back()));
  // Halving per doubling, measured as a trend: the least-squares slope of
  // log2|increment| against the dyadic index must be <= -1. Individual
  // increments of an oscillatory integrand can dip near a phase zero, so
  // consecutive pairs are not compared directly.
  auto halving_trend = [](const std::vector<double>& inc, double floor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t k = 0; k < inc.size(); ++k) {
      if (std::abs(inc[k]) <= floor) continue;
      const double x = static_cast<double>(k);
      const double y = std::log2(std::abs(inc[k]));
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
    if (n < 3) return true;  // nothing above the floor
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return slope <= -1.0;
  };
  rep.sin_converged = halving_trend(rep.sin_increments, floor_s);
  rep.cos_converged = halving_trend(rep.cos_increments, floor_c);
  return rep;
}

}  // namespace oscillab
