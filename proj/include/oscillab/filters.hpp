#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "oscillab/coeffs.hpp"
#include "oscillab/integrate.hpp"
#include "oscillab/quadrature.hpp"

namespace oscillab {

/// h = e_{w^2} * e_{w^2}, the kernel of the second filter:
///   h(t)   = t e^{-w^2 t}
///   h'(t)  = (1 - w^2 t) e^{-w^2 t}
///   h''(t) = (w^4 t - 2 w^2) e^{-w^2 t}
struct HKernel {
  double omega;
  double value(double t) const { return t * std::exp(-omega * omega * t); }
  double d1(double t) const {
    const double w2 = omega * omega;
    return (1.0 - w2 * t) * std::exp(-w2 * t);
  }
  double d2(double t) const {
    const double w2 = omega * omega;
    return (w2 * w2 * t - 2.0 * w2) * std::exp(-w2 * t);
  }
};

inline double h_kernel(double t, double omega) {
  if (t < 0.0) throw std::domain_error("h_kernel: negative argument");
  return HKernel{omega}.value(t);
}

enum class FilterMethod { ode_cascade, direct_quadrature, k3_reconstruction };

struct FilterOracleResult {
  std::vector<double> times;
  std::vector<double> values;
  FilterMethod method = FilterMethod::direct_quadrature;
};

namespace detail {

// Quadrature of int_0^t k(sigma) f(t - sigma) dsigma with an exponentially
// small tail cut once k has decayed below rounding.
template <class K, class F>
double convolve_at(K&& kernel, F&& f, double t, double t_origin, double w2) {
  const double cut = 45.0 / w2;
  const double upper = std::min(t - t_origin, cut);
  if (upper <= 0.0) return 0.0;
  const double panel = std::min(0.2, 0.2 / w2);
  const int panels = std::max(8, static_cast<int>(std::ceil(upper / panel)));
  return integrate_panels(
      [&](double sigma) { return kernel(sigma) * f(t - sigma); }, 0.0, upper,
      panels);
}

}  // namespace detail

/// First and second filters evaluated by direct quadrature against f:
///   y1(t) = int e^{-w^2 s} f(t-s) ds,   y2(t) = int s e^{-w^2 s} f(t-s) ds.
/// Grid spacing must resolve the kernel scale (<= 0.1/w^2).
inline std::pair<FilterOracleResult, FilterOracleResult> y_filters_quadrature(
    const ForcingSpec& forcing, double omega, std::span<const double> t_grid) {
  const double w2 = omega * omega;
  if (t_grid.size() >= 2 && (t_grid[1] - t_grid[0]) > 0.1 / w2 * (1.0 + 1e-12))
    throw std::invalid_argument(
        "y_filters_quadrature: grid spacing coarser than 0.1/omega^2");
  FilterOracleResult y1, y2;
  y1.method = y2.method = FilterMethod::direct_quadrature;
  y1.times.assign(t_grid.begin(), t_grid.end());
  y2.times = y1.times;
  y1.values.resize(t_grid.size());
  y2.values.resize(t_grid.size());
  const double t0 = t_grid.empty() ? 0.0 : t_grid.front();
  const HKernel h{omega};
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    y1.values[i] = detail::convolve_at(
        [w2](double s) { return std::exp(-w2 * s); }, forcing.f, t, t0, w2);
    y2.values[i] = detail::convolve_at(
        [&h](double s) { return h.value(s); }, forcing.f, t, t0, w2);
  }
  return {std::move(y1), std::move(y2)};
}

/// Reconstructs the second filter from the state alone:
///   y2(t) = x(t) + int K3(t,s) x(s) ds,
///   K3(t,s) = h''(t-s) + w^2 h(t-s) + p(s) h'(t-s) - p'(s) h(t-s).
/// Valid only for trajectories started at rest; evaluated every `stride`
/// output points (the integral is O(n) per point).
inline FilterOracleResult y2_from_x(const Trajectory& traj,
                                    const DampingFamily& family, double omega,
                                    std::size_t stride = 10) {
  if (traj.x.empty()) throw std::invalid_argument("y2_from_x: empty trajectory");
  if (traj.x.front() != 0.0 || traj.dx.front() != 0.0)
    throw std::invalid_argument("y2_from_x: nonzero initial conditions");
  if (stride == 0) stride = 1;

  const double w2 = omega * omega;
  const HKernel h{omega};
  const double dt = traj.spacing();
  const double cut = 45.0 / w2;

  FilterOracleResult out;
  out.method = FilterMethod::k3_reconstruction;
  std::vector<double> integrand;
  for (std::size_t j = 0; j < traj.size(); j += stride) {
    const double t = traj.t[j];
    std::size_t i0 = 0;
    if (t - traj.t0() > cut)
      i0 = static_cast<std::size_t>(std::floor((t - cut - traj.t0()) / dt));
    integrand.resize(j - i0 + 1);
    for (std::size_t i = i0; i <= j; ++i) {
      const double s = traj.t[i];
      const double tau = t - s;
      const double k3 = h.d2(tau) + w2 * h.value(tau) +
                        family.p(s) * h.d1(tau) - family.dp(s) * h.value(tau);
      integrand[i - i0] = k3 * traj.x[i];
    }
    out.times.push_back(t);
    out.values.push_back(traj.x[j] + integrate_sampled(integrand, dt));
  }
  return out;
}

}  // namespace oscillab
