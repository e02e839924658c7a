#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace seema {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kSqrt2 = 1.4142135623730950488;

// Raised by analysis routines when a computation cannot be completed
// (unbounded Legendre supremum, quadrature failure, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Standard normal upper tail P(Z > x).
inline double gaussian_q(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// P(|X| > x) for X ~ N(0, sigma^2), x >= 0.
inline double gaussian_two_sided_tail(double x, double sigma) {
  return std::erfc(x / (sigma * kSqrt2));
}

// Scaled complementary error function e^{x^2} erfc(x) for x >= 0.
// Direct evaluation is fine until erfc underflows; beyond that the
// asymptotic series in 1/(2x^2) has terms far below double precision.
inline double erfcx_nonneg(double x) {
  if (x < 15.0) return std::exp(x * x) * std::erfc(x);
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2 * k - 1) * inv2x2;
    sum += term;
  }
  return sum / (x * kSqrtPi);
}

namespace detail {

inline double simpson_segment(double a, double fa, double b, double fb,
                              double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double fa, double b, double fb,
                                   double m, double fm, double whole,
                                   double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_segment(a, fa, m, fm, flm);
  const double right = simpson_segment(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  // Relative floor: asking for absolute accuracy below the roundoff of the
  // segment values would recurse without converging.
  const double floor_tol = 1e-13 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, floor_tol)) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol,
                              depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol,
                              depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with an absolute tolerance. Seeds the
// recursion with uniform panels so that narrow features away from the
// interval midpoints are not skipped.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = 1e-10, int max_depth = 40,
                        int seed_panels = 32) {
  if (!(a < b)) return 0.0;
  const double panel = (b - a) / seed_panels;
  const double panel_tol = abs_tol / seed_panels;
  double total = 0.0;
  for (int i = 0; i < seed_panels; ++i) {
    const double lo = a + i * panel;
    const double hi = (i + 1 == seed_panels) ? b : lo + panel;
    const double m = 0.5 * (lo + hi);
    const double flo = f(lo), fhi = f(hi), fm = f(m);
    const double whole = detail::simpson_segment(lo, flo, hi, fhi, fm);
    total += detail::adaptive_simpson_rec(f, lo, flo, hi, fhi, m, fm, whole,
                                          panel_tol, max_depth);
  }
  return total;
}

// Bisection for a root of f on [lo, hi]; f(lo) and f(hi) must differ in sign.
// Returns the midpoint of the final bracket.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double x_tol, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalError("bisect_root: interval does not bracket a root");
  }
  for (int i = 0; i < max_iter && (hi - lo) > x_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// n-th element of the Halton sequence in the given prime base, in [0, 1).
inline double halton(unsigned long long n, unsigned base) {
  double f = 1.0, r = 0.0;
  while (n > 0) {
    f /= base;
    r += f * (n % base);
    n /= base;
  }
  return r;
}

}  // namespace seema
