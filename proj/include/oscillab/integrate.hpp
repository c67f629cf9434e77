#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscillab/coeffs.hpp"
#include "oscillab/csv.hpp"
#include "oscillab/rk.hpp"

namespace oscillab {

/// Uniform output grid. The spacing must resolve the oscillation:
/// at least 40 output samples per period 2*pi/omega.
struct Grid {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t output_points = 0;

  static Grid for_oscillator(double t0, double horizon, double omega,
                             std::size_t per_period = 40) {
    if (horizon <= t0) throw std::invalid_argument("Grid: horizon <= t0");
    if (per_period < 40) per_period = 40;
    const double period = 2.0 * kPi / std::abs(omega);
    const auto n = static_cast<std::size_t>(
        std::ceil((horizon - t0) / (period / per_period))) + 1;
    return Grid{t0, horizon, n < 2 ? 2 : n};
  }

  double spacing() const {
    return (t_end - t_start) / static_cast<double>(output_points - 1);
  }

  std::vector<double> times() const {
    std::vector<double> ts(output_points);
    const double h = spacing();
    for (std::size_t i = 0; i < output_points; ++i) ts[i] = t_start + h * i;
    ts.back() = t_end;
    return ts;
  }

  void validate(double omega) const {
    if (!(t_end > t_start) || output_points < 2)
      throw std::invalid_argument("Grid: t_end <= t_start or too few points");
    if (spacing() > 2.0 * kPi / std::abs(omega) / 40.0 * (1.0 + 1e-12))
      throw std::invalid_argument("Grid: spacing coarser than period/40");
  }
};

/// Sampled solution with the augmented channels:
///   x, dx        state and velocity
///   y1, y2       filter cascade  y1' = -w^2 y1 + f,  y2' = -w^2 y2 + y1
///   logA         log envelope weight, logA' = p/2
///   U1,V1,U2,V2  normalized weighted integrals, U' = cos(w t) y - (p/2) U
///   ic_run,is_run raw running integrals of cos/sin(w s) A(s) y2(s)
///   uf,vf        forcing-weighted normalized integrals
struct Trajectory {
  double omega = 1.0;
  std::vector<double> t, x, dx, y1, y2, logA;
  std::vector<double> U1, V1, U2, V2;
  std::vector<double> ic_run, is_run;
  std::vector<double> uf, vf;

  std::size_t size() const { return t.size(); }
  double t0() const { return t.front(); }
  double horizon() const { return t.back(); }
  double spacing() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }

  void write_csv(std::ostream& os) const {
    os << "t,x,dx,y1,y2,logA,U1,V1,U2,V2\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
      os << fmt17(t[i]) << ',' << fmt17(x[i]) << ',' << fmt17(dx[i]) << ','
         << fmt17(y1[i]) << ',' << fmt17(y2[i]) << ',' << fmt17(logA[i]) << ','
         << fmt17(U1[i]) << ',' << fmt17(V1[i]) << ',' << fmt17(U2[i]) << ','
         << fmt17(V2[i]) << '\n';
    }
  }
};

namespace detail {

inline void check_tol(double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-6))
    throw std::invalid_argument("integrate: tol outside [1e-13, 1e-6]");
}

}  // namespace detail

/// Integrates the forced oscillator x'' + p x' + w^2 x = f together with all
/// augmented channels in one pass. Aborts if logA exceeds 300 (the raw
/// weighted integrals would overflow).
inline Trajectory integrate_forced(const SystemSpec& spec,
                                   const DampingFamily& family,
                                   const ForcingSpec& forcing, const Grid& grid,
                                   double tol) {
  detail::check_tol(tol);
  grid.validate(spec.omega);
  if (grid.t_start != family.t0)
    throw std::invalid_argument("integrate_forced: grid must start at family t0");

  const double w = spec.omega, w2 = w * w;
  // State layout: x v y1 y2 logA U1 V1 U2 V2 Ic Is Uf Vf
  constexpr std::size_t N = 13;
  auto rhs = [&](double t, const RkState<N>& y, RkState<N>& d) {
    if (y[4] > 300.0)
      throw IntegrationError("integrate_forced: envelope overflow (logA > 300)", t);
    const double p = family.p(t);
    const double f = forcing.f(t);
    const double c = std::cos(w * t), s = std::sin(w * t);
    const double A = std::exp(y[4]);
    d[0] = y[1];
    d[1] = f - p * y[1] - w2 * y[0];
    d[2] = -w2 * y[2] + f;
    d[3] = -w2 * y[3] + y[2];
    d[4] = 0.5 * p;
    d[5] = c * y[2] - 0.5 * p * y[5];
    d[6] = s * y[2] - 0.5 * p * y[6];
    d[7] = c * y[3] - 0.5 * p * y[7];
    d[8] = s * y[3] - 0.5 * p * y[8];
    d[9] = c * A * y[3];
    d[10] = s * A * y[3];
    d[11] = c * f - 0.5 * p * y[11];
    d[12] = s * f - 0.5 * p * y[12];
  };

  RkState<N> y0{};
  y0[0] = spec.xi0;
  y0[1] = spec.xi1;

  Trajectory tr;
  tr.omega = w;
  const auto times = grid.times();
  const std::size_t n = times.size();
  tr.t = times;
  for (auto* v : {&tr.x, &tr.dx, &tr.y1, &tr.y2, &tr.logA, &tr.U1, &tr.V1,
                  &tr.U2, &tr.V2, &tr.ic_run, &tr.is_run, &tr.uf, &tr.vf})
    v->resize(n);

  auto sink = [&](std::size_t i, double, const RkState<N>& y) {
    tr.x[i] = y[0]; tr.dx[i] = y[1]; tr.y1[i] = y[2]; tr.y2[i] = y[3];
    tr.logA[i] = y[4]; tr.U1[i] = y[5]; tr.V1[i] = y[6]; tr.U2[i] = y[7];
    tr.V2[i] = y[8]; tr.ic_run[i] = y[9]; tr.is_run[i] = y[10];
    tr.uf[i] = y[11]; tr.vf[i] = y[12];
  };
  rk_integrate<N>(rhs, grid.t_start, y0, grid.t_end, tol, tol, times, sink,
                  kPi / w);
  return tr;
}

/// Integrates the transformed equation u'' + (w^2 + q(t)) u = f(t) A(t),
/// maps back through x = rho u, and returns the largest disagreement with
/// integrate_forced over the grid. Initial slope: u'(t0) = xi1 + p(t0) xi0 / 2.
inline double integrate_undamped_crosscheck(const SystemSpec& spec,
                                            const DampingFamily& family,
                                            const ForcingSpec& forcing,
                                            const Grid& grid, double tol) {
  detail::check_tol(tol);
  const Trajectory ref = integrate_forced(spec, family, forcing, grid, tol);

  const double w2 = spec.omega * spec.omega;
  constexpr std::size_t N = 3;  // u, u', logA
  auto rhs = [&](double t, const RkState<N>& y, RkState<N>& d) {
    if (y[2] > 300.0)
      throw IntegrationError(
          "integrate_undamped_crosscheck: forcing weight overflow (logA > 300)", t);
    const double q = residual_potential(family, t);
    const double g = forcing.f(t) * std::exp(y[2]);
    d[0] = y[1];
    d[1] = g - (w2 + q) * y[0];
    d[2] = 0.5 * family.p(t);
  };

  RkState<N> y0{spec.xi0, spec.xi1 + 0.5 * family.p(family.t0) * spec.xi0, 0.0};
  double max_disc = 0.0;
  auto sink = [&](std::size_t i, double, const RkState<N>& y) {
    const double x_mapped = std::exp(-y[2]) * y[0];
    max_disc = std::max(max_disc, std::abs(x_mapped - ref.x[i]));
  };
  rk_integrate<N>(rhs, grid.t_start, y0, grid.t_end, tol, tol, ref.t, sink,
                  kPi / spec.omega);
  return max_disc;
}

}  // namespace oscillab
