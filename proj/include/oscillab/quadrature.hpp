#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace oscillab {

inline constexpr double kPi = 3.14159265358979323846;

namespace detail {

// 7-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr std::array<double, 7> kGl7Nodes = {
    -0.94910791234275852453, -0.74153118559939443986, -0.40584515137739716691,
    0.0,
    0.40584515137739716691,  0.74153118559939443986,  0.94910791234275852453};
inline constexpr std::array<double, 7> kGl7Weights = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776,
    0.38183005050511894495, 0.27970539148927666790, 0.12948496616886969327};

}  // namespace detail

template <class F>
double gauss7(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t i = 0; i < 7; ++i)
    acc += detail::kGl7Weights[i] * f(mid + half * detail::kGl7Nodes[i]);
  return acc * half;
}

/// Composite Gauss-Legendre over [a, b] with a fixed panel count.
template <class F>
double integrate_panels(F&& f, double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("integrate_panels: panels < 1");
  const double w = (b - a) / panels;
  double acc = 0.0, carry = 0.0;  // Kahan
  for (int k = 0; k < panels; ++k) {
    const double v = gauss7(f, a + k * w, a + (k + 1) * w) - carry;
    const double next = acc + v;
    carry = (next - acc) - v;
    acc = next;
  }
  return acc;
}

namespace detail {

template <class F>
double adaptive_simpson_rec(F& f, double a, double m, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature; tol is an absolute target.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol,
                          int max_depth = 50) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, tol,
                                      max_depth);
}

/// Cumulative integral of f along the given points; out[0] = 0.
/// One Gauss panel per interval, Kahan-compensated running sum.
template <class F>
std::vector<double> cumulative_gauss(F&& f, std::span<const double> pts) {
  std::vector<double> out(pts.size(), 0.0);
  double acc = 0.0, carry = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double v = gauss7(f, pts[i - 1], pts[i]) - carry;
    const double next = acc + v;
    carry = (next - acc) - v;
    acc = next;
    out[i] = acc;
  }
  return out;
}

/// Composite Simpson for uniformly spaced samples. An odd interval count is
/// handled with a 3/8 block at the front.
inline double integrate_sampled(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (y[0] + y[1]);
  if (n == 3) return h / 3.0 * (y[0] + 4.0 * y[1] + y[2]);
  std::size_t i = 0;
  double acc = 0.0;
  if ((n - 1) % 2 != 0) {
    acc += 3.0 * h / 8.0 * (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]);
    i = 3;
  }
  double s_end = y[i] + y[n - 1], s4 = 0.0, s2 = 0.0;
  for (std::size_t j = i + 1; j < n - 1; j += 2) s4 += y[j];
  for (std::size_t j = i + 2; j < n - 1; j += 2) s2 += y[j];
  return acc + h / 3.0 * (s_end + 4.0 * s4 + 2.0 * s2);
}

/// Cumulative integral of uniform samples, fourth order; out[0] = 0.
/// Interval increments use the two-sided cubic rule
///   int_{x_k}^{x_k+1} ~= h/24 (-y_{k-1} + 13 y_k + 13 y_{k+1} - y_{k+2})
/// with one-sided variants at the ends.
inline std::vector<double> cumulative_sampled(std::span<const double> y,
                                              double h) {
  const std::size_t n = y.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n < 4) {
    for (std::size_t k = 1; k < n; ++k)
      out[k] = out[k - 1] + 0.5 * h * (y[k - 1] + y[k]);
    return out;
  }
  double acc = 0.0, carry = 0.0;
  auto add = [&](double v) {
    v -= carry;
    const double next = acc + v;
    carry = (next - acc) - v;
    acc = next;
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double inc;
    if (k == 0)
      inc = h / 24.0 * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]);
    else if (k + 2 == n)
      inc = h / 24.0 *
            (9.0 * y[n - 1] + 19.0 * y[n - 2] - 5.0 * y[n - 3] + y[n - 4]);
    else
      inc = h / 24.0 * (-y[k - 1] + 13.0 * y[k] + 13.0 * y[k + 1] - y[k + 2]);
    add(inc);
    out[k + 1] = acc;
  }
  return out;
}

}  // namespace oscillab
