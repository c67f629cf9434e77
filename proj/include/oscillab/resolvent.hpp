#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscillab/coeffs.hpp"
#include "oscillab/csv.hpp"
#include "oscillab/quadrature.hpp"
#include "oscillab/rk.hpp"

namespace oscillab {

// Green's function of u'' + (w^2 + q(t)) u = 0 launched at t = s with
// G(s,s) = 0, G_t(s,s) = 1, plus the s-variation integrated alongside
// (G_s(s,s) = -1, G_ts(s,s) = 0). The oscillator resolvent is
//   R(t,s) = E(t,s) G(t,s),          E(t,s) = A(s)/A(t),
// and the derived kernels
//   K1 = w^2 R - R_s,   K2 = w^2 R_t - R_ts,   K4 = w^2 K1 - dK1/ds,
//   P1 = K1 - E L1,     P4 = K4 - E L3.

struct GreenState {
  double G = 0.0, G_t = 0.0, G_s = 0.0, G_ts = 0.0;
};

struct KernelSet {
  double t = 0.0, s = 0.0;
  double G = 0.0, G_t = 0.0, G_s = 0.0;
  double R = 0.0, R_t = 0.0, R_s = 0.0, R_ts = 0.0;
  double K1 = 0.0, K2 = 0.0, K4 = 0.0;
  double P1 = 0.0, P4 = 0.0;
  double fd_disagreement = 0.0;  // Richardson consistency of the K4 difference
};

namespace detail {

constexpr double kGreenTol = 1e-12;

template <class Sink>
void green_integrate(const DampingFamily& fam, double omega, double s,
                     std::span<const double> t_grid, Sink&& sink) {
  const double w2 = omega * omega;
  auto rhs = [&](double t, const RkState<4>& y, RkState<4>& d) {
    const double c = w2 + residual_potential(fam, t);
    d[0] = y[1];
    d[1] = -c * y[0];
    d[2] = y[3];
    d[3] = -c * y[2];
  };
  RkState<4> y0{0.0, 1.0, -1.0, 0.0};
  rk_integrate<4>(rhs, s, y0, t_grid.empty() ? s : t_grid.back(), kGreenTol,
                  kGreenTol, t_grid, sink, kPi / omega);
}

}  // namespace detail

inline GreenState green_state(const DampingFamily& fam, double omega, double s,
                              double t) {
  if (t < s) throw std::invalid_argument("green_state: t < s");
  GreenState out{0.0, 1.0, -1.0, 0.0};
  const double pts[1] = {t};
  detail::green_integrate(fam, omega, s, pts,
                          [&](std::size_t, double, const RkState<4>& y) {
                            out = GreenState{y[0], y[1], y[2], y[3]};
                          });
  return out;
}

/// G(t, s) on an ascending grid of t values, all >= s.
inline std::vector<double> green_direct(const DampingFamily& fam, double omega,
                                        double s,
                                        std::span<const double> t_grid) {
  if (!t_grid.empty() && t_grid.front() < s)
    throw std::invalid_argument("green_direct: grid point below s");
  std::vector<double> out(t_grid.size());
  detail::green_integrate(
      fam, omega, s, t_grid,
      [&](std::size_t i, double, const RkState<4>& y) { out[i] = y[0]; });
  return out;
}

namespace detail {

// Picard iterates on a uniform grid over [s, t]. The displaced sine kernel
// splits as sin(w(t-tau)) = sin(wt)cos(wtau) - cos(wt)sin(wtau), so each
// sweep costs two cumulative integrals.
inline std::vector<double> picard_sup_diffs(const DampingFamily& fam,
                                            double omega, double s, double t,
                                            std::size_t iterations,
                                            double* final_value) {
  if (iterations < 1)
    throw std::invalid_argument("green_picard: iterations < 1");
  if (t < s) throw std::invalid_argument("green_picard: t < s");
  const double len = t - s;
  const std::size_t n =
      std::max<std::size_t>(17, static_cast<std::size_t>(
                                    std::ceil(len * omega * 512.0 / (2.0 * kPi))) + 1);
  const double h = len / static_cast<double>(n - 1);

  std::vector<double> tau(n), qv(n), g(n), ci(n), si(n);
  for (std::size_t j = 0; j < n; ++j) {
    tau[j] = s + h * static_cast<double>(j);
    qv[j] = residual_potential(fam, tau[j]);
    g[j] = std::sin(omega * (tau[j] - s)) / omega;
  }

  std::vector<double> diffs;
  std::vector<double> gnext(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = qv[j] * g[j];
      ci[j] = std::cos(omega * tau[j]) * w;
      si[j] = std::sin(omega * tau[j]) * w;
    }
    const auto C = cumulative_sampled(ci, h);
    const auto S = cumulative_sampled(si, h);
    double sup = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double conv =
          std::sin(omega * tau[j]) * C[j] - std::cos(omega * tau[j]) * S[j];
      gnext[j] = std::sin(omega * (tau[j] - s)) / omega - conv / omega;
      sup = std::max(sup, std::abs(gnext[j] - g[j]));
    }
    diffs.push_back(sup);
    g.swap(gnext);
  }
  if (final_value) *final_value = g.back();
  return diffs;
}

}  // namespace detail

/// Picard iterate of the second-kind Volterra equation for G, starting from
/// the unperturbed sine and sweeping `iterations` times.
inline double green_picard(const DampingFamily& fam, double omega, double s,
                           double t, std::size_t iterations) {
  double value = 0.0;
  detail::picard_sup_diffs(fam, omega, s, t, iterations, &value);
  return value;
}

/// Sup-norm gaps between successive Picard iterates (contraction trace).
inline std::vector<double> green_picard_diffs(const DampingFamily& fam,
                                              double omega, double s, double t,
                                              std::size_t iterations) {
  return detail::picard_sup_diffs(fam, omega, s, t, iterations, nullptr);
}

/// max over the grid of |G(t,s)| * w * exp(-Q(s)/w); the bound holds iff <= 1.
inline double certify_gronwall(const DampingFamily& fam, double omega, double s,
                               std::span<const double> t_grid,
                               double q_horizon = 0.0) {
  if (q_horizon <= 0.0)
    q_horizon = std::max(1e4, 10.0 * (t_grid.empty() ? s : t_grid.back()));
  const double Q = tail_Q(fam, s, q_horizon);
  const auto G = green_direct(fam, omega, s, t_grid);
  double m = 0.0;
  for (double v : G) m = std::max(m, std::abs(v));
  return m * omega * std::exp(-Q / omega);
}

struct ExpansionError {
  double actual = 0.0;
  double bound = 0.0;
  bool pass() const { return std::abs(actual) <= bound; }
};

/// Residual of the first-order expansion of G against its certified bound
///   |G - sin(w(t-s))/w + (1/w^2) int sin(w(t-tau)) sin(w(tau-s)) q dtau|
///     <= exp(Q(s)/w) Q(s)^2 / (2 w^3).
inline ExpansionError certify_expansion_error(const DampingFamily& fam,
                                              double omega, double s, double t,
                                              double q_horizon = 0.0) {
  if (t < s) throw std::invalid_argument("certify_expansion_error: t < s");
  if (q_horizon <= 0.0) q_horizon = std::max(1e4, 10.0 * t);
  const double G = green_state(fam, omega, s, t).G;
  const double first = integrate_adaptive(
      [&](double tau) {
        return std::sin(omega * (t - tau)) * std::sin(omega * (tau - s)) *
               residual_potential(fam, tau);
      },
      s, t, 1e-13);
  const double Q = tail_Q(fam, s, q_horizon);
  ExpansionError out;
  out.actual = G - std::sin(omega * (t - s)) / omega + first / (omega * omega);
  out.bound = std::exp(Q / omega) * Q * Q / (2.0 * omega * omega * omega);
  return out;
}

namespace detail {

inline double kernel_k1(const DampingFamily& fam, double omega, double t,
                        double s) {
  const GreenState gs = green_state(fam, omega, s, t);
  const double E = fam.envelope_ratio(t, s);
  const double R = E * gs.G;
  const double R_s = E * (0.5 * fam.p(s) * gs.G + gs.G_s);
  return omega * omega * R - R_s;
}

}  // namespace detail

/// Assembles the kernel set at one (t, s) pair. G and its partials come from
/// variational integrations; K1 and K2 are exact in those; the s-derivative
/// inside K4 uses Richardson-extrapolated central differences (falling back
/// to one-sided stencils at the ends of the admissible range).
inline KernelSet kernels_at(const DampingFamily& fam, const SystemSpec& spec,
                            double t, double s, double fd_step = 0.0) {
  if (!(t >= s && s >= fam.t0))
    throw std::invalid_argument("kernels_at: need t >= s >= t0");
  const double w = spec.omega, w2 = w * w;
  if (fd_step <= 0.0) fd_step = 1e-4 * (2.0 * kPi / w);

  KernelSet ks;
  ks.t = t;
  ks.s = s;
  const GreenState gs = green_state(fam, w, s, t);
  const double E = fam.envelope_ratio(t, s);
  const double ps = fam.p(s), pt = fam.p(t);
  ks.G = gs.G;
  ks.G_t = gs.G_t;
  ks.G_s = gs.G_s;
  ks.R = E * gs.G;
  ks.R_t = E * (-0.5 * pt * gs.G + gs.G_t);
  ks.R_s = E * (0.5 * ps * gs.G + gs.G_s);
  ks.R_ts = E * (-0.5 * pt * (0.5 * ps * gs.G + gs.G_s) + 0.5 * ps * gs.G_t +
                 gs.G_ts);
  ks.K1 = w2 * ks.R - ks.R_s;
  ks.K2 = w2 * ks.R_t - ks.R_ts;

  auto k1_at = [&](double sp) { return detail::kernel_k1(fam, w, t, sp); };
  auto richardson = [&](auto&& stencil, double h) {
    const double d1 = stencil(h), d2 = stencil(0.5 * h);
    const double extrap = (4.0 * d2 - d1) / 3.0;
    ks.fd_disagreement = std::abs(d2 - d1) / std::max(1.0, std::abs(extrap));
    return extrap;
  };
  auto central = [&](double hh) {
    return (k1_at(s + hh) - k1_at(s - hh)) / (2.0 * hh);
  };
  auto backward = [&](double hh) {
    return (3.0 * ks.K1 - 4.0 * k1_at(s - hh) + k1_at(s - 2.0 * hh)) /
           (2.0 * hh);
  };
  auto forward = [&](double hh) {
    return (-3.0 * ks.K1 + 4.0 * k1_at(s + hh) - k1_at(s + 2.0 * hh)) /
           (2.0 * hh);
  };
  double dk1_ds;
  if (std::min(t - s, s - fam.t0) >= fd_step) {
    dk1_ds = richardson(central, fd_step);
  } else if (s - 2.0 * fd_step >= fam.t0) {
    dk1_ds = richardson(backward, fd_step);  // s at or near the diagonal
  } else if (s + 2.0 * fd_step <= t) {
    dk1_ds = richardson(forward, fd_step);  // s at or near the family start
  } else {
    const double h = 0.5 * std::min(t - s, s - fam.t0);
    if (h <= 0.0) {
      // No room for any stencil (t = s = t0).
      ks.K4 = std::numeric_limits<double>::quiet_NaN();
      ks.P4 = ks.K4;
      ks.fd_disagreement = std::numeric_limits<double>::infinity();
      const double tau = t - s;
      ks.P1 = ks.K1 - E * (w * std::sin(w * tau) + std::cos(w * tau));
      return ks;
    }
    dk1_ds = richardson(central, h);
  }
  ks.K4 = w2 * ks.K1 - dk1_ds;

  const double tau = t - s;
  const double L1 = w * std::sin(w * tau) + std::cos(w * tau);
  const double L3 = (w2 * w - w) * std::sin(w * tau) + 2.0 * w2 * std::cos(w * tau);
  ks.P1 = ks.K1 - E * L1;
  ks.P4 = ks.K4 - E * L3;
  return ks;
}

/// Closed-form route for K4 = w^4 R - 2 w^2 R_s + R_ss, using the fact that
/// G also solves the same equation in s, so G_ss = -(w^2 + q(s)) G.
inline double kernel_k4_exact(const DampingFamily& fam, double omega, double t,
                              double s) {
  const double w2 = omega * omega;
  const GreenState gs = green_state(fam, omega, s, t);
  const double E = fam.envelope_ratio(t, s);
  const double ps = fam.p(s);
  const double qs = residual_potential(fam, s);
  const double R = E * gs.G;
  const double R_s = E * (0.5 * ps * gs.G + gs.G_s);
  const double G_ss = -(w2 + qs) * gs.G;
  // d/ds E = p(s)/2 E; collect E [ (p^2/4 + p'/2) G + p G_s + G_ss ].
  const double R_ss = E * ((0.25 * ps * ps + 0.5 * fam.dp(s)) * gs.G +
                           ps * gs.G_s + G_ss);
  return w2 * w2 * R - 2.0 * w2 * R_s + R_ss;
}

struct L1WeightReport {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
  double bound1 = 2.0, bound2 = 2.0, bound3 = 0.0;  // bound3 = p(t0)
  bool pass() const { return w1 <= bound1 && w2 <= bound2 && w3 <= bound3; }
  double min_margin() const {
    return std::min({bound1 - w1, bound2 - w2, bound3 - w3});
  }
};

/// The three uniformly bounded weight integrals
///   w1 = int E(t,s) p(s) ds <= 2,
///   w2 = p(t) int E(t,s) ds <= 2,
///   w3 = int E(t,s) |q(s)| ds <= p(t0).
inline L1WeightReport certify_L1_weights(const DampingFamily& fam,
                                         double /*omega*/, double t) {
  if (t < fam.t0) throw std::invalid_argument("certify_L1_weights: t < t0");
  L1WeightReport rep;
  rep.bound3 = fam.p(fam.t0);
  if (t == fam.t0) return rep;
  auto E = [&](double s) { return fam.envelope_ratio(t, s); };
  rep.w1 = integrate_adaptive([&](double s) { return E(s) * fam.p(s); },
                              fam.t0, t, 1e-12);
  rep.w2 = fam.p(t) *
           integrate_adaptive([&](double s) { return E(s); }, fam.t0, t, 1e-12);
  rep.w3 = integrate_adaptive(
      [&](double s) { return E(s) * std::abs(residual_potential(fam, s)); },
      fam.t0, t, 1e-12);
  return rep;
}

inline void write_kernel_csv(std::ostream& os,
                             std::span<const KernelSet> rows) {
  os << "t,s,G,R,K1,K2,K4,P1,P4\n";
  for (const auto& k : rows) {
    os << fmt17(k.t) << ',' << fmt17(k.s) << ',' << fmt17(k.G) << ','
       << fmt17(k.R) << ',' << fmt17(k.K1) << ',' << fmt17(k.K2) << ','
       << fmt17(k.K4) << ',' << fmt17(k.P1) << ',' << fmt17(k.P4) << '\n';
  }
}

}  // namespace oscillab
