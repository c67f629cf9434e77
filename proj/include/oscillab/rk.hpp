#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace oscillab {

template <std::size_t N>
using RkState = std::array<double, N>;

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t_last)
      : std::runtime_error(what + " at t=" + std::to_string(t_last)),
        t_last_(t_last) {}
  double t_last() const { return t_last_; }

 private:
  double t_last_;
};

struct RkStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense-output weights.
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) with PI step control and 4th-order dense
/// output. `sink(i, t, y)` is invoked once per requested output time, in
/// order; out_times must be ascending and lie in [t0, t_end].
template <std::size_t N, class RHS, class Sink>
RkStats rk_integrate(RHS&& rhs, double t0, RkState<N> y, double t_end,
                     double abs_tol, double rel_tol,
                     std::span<const double> out_times, Sink&& sink,
                     double h_max = 0.0) {
  using State = RkState<N>;
  constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  const double span = t_end - t0;
  if (span < 0.0) throw std::invalid_argument("rk_integrate: t_end < t0");
  if (h_max <= 0.0) h_max = span;

  std::size_t next_out = 0;
  while (next_out < out_times.size() && out_times[next_out] <= t0) {
    sink(next_out, out_times[next_out], y);
    ++next_out;
  }
  if (span == 0.0) return {};

  State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
  rhs(t0, y, k1);

  double t = t0;
  double h = std::min({h_max, span, 1e-2});
  double facold = 1e-4;
  RkStats stats;
  const std::size_t max_steps = 200'000'000;

  while (t < t_end) {
    if (stats.accepted + stats.rejected > max_steps)
      throw IntegrationError("rk_integrate: step budget exhausted", t);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t) + 1e-300)
      throw IntegrationError("rk_integrate: step size underflow", t);
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }

    using namespace detail;
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] =
          y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                            a75 * k5[i] + a76 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc =
          abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
      const double r = e / sc;
      err += r * r;
    }
    err = std::sqrt(err / N);

    const double fac11 = std::pow(std::max(err, 1e-32), expo1);
    if (err <= 1.0) {
      // Accepted: serve dense output inside (t, t+h].
      if (next_out < out_times.size() && out_times[next_out] <= t + h) {
        State r2, r3, r4, r5;
        for (std::size_t i = 0; i < N; ++i) {
          r2[i] = ynew[i] - y[i];
          r3[i] = h * k1[i] - r2[i];
          r4[i] = r2[i] - h * k7[i] - r3[i];
          r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                       d6 * k6[i] + d7 * k7[i]);
        }
        State yout;
        while (next_out < out_times.size() &&
               (out_times[next_out] <= t + h ||
                (last && out_times[next_out] <= t_end + 1e-12 * std::abs(t_end)))) {
          const double theta = std::clamp((out_times[next_out] - t) / h, 0.0, 1.0);
          const double th1 = 1.0 - theta;
          for (std::size_t i = 0; i < N; ++i)
            yout[i] = y[i] + theta * (r2[i] +
                                      th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
          sink(next_out, out_times[next_out], yout);
          ++next_out;
        }
      }
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
      facold = std::max(err, 1e-4);
      t = last ? t_end : t + h;  // land exactly, no residual sliver step
      y = ynew;
      k1 = k7;  // FSAL
      h = std::min(h / fac, h_max);
      ++stats.accepted;
    } else {
      h = h / std::min(1.0 / facl, fac11 / safe);
      ++stats.rejected;
    }
  }
  // Anything left is the endpoint (within rounding).
  while (next_out < out_times.size()) {
    sink(next_out, out_times[next_out], y);
    ++next_out;
  }
  return stats;
}

/// Fixed-step driver over the same tableau (no error control); used for
/// convergence-order studies.
template <std::size_t N, class RHS>
RkState<N> rk_fixed_steps(RHS&& rhs, double t0, RkState<N> y, double t_end,
                          std::size_t nsteps) {
  using namespace detail;
  using State = RkState<N>;
  const double h = (t_end - t0) / static_cast<double>(nsteps);
  State k1, k2, k3, k4, k5, k6, ytmp;
  for (std::size_t n = 0; n < nsteps; ++n) {
    const double t = t0 + n * h;
    rhs(t, y, k1);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] =
          y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < N; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                            a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                         a76 * k6[i]);
  }
  return y;
}

}  // namespace oscillab
