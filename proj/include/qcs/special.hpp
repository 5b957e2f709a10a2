#pragma once

// Special functions and small 1-D solvers used by the boundary code.
// Everything works in log space where arguments can grow with t.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "qcs/errors.hpp"

namespace qcs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// log Gamma(x) for x > 0: upward recurrence to x >= 10, then Stirling.
inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be positive and finite");
  }
  double shift = 0.0;
  if (x < 10.0) {
    double prod = 1.0;
    while (x < 10.0) {
      prod *= x;
      x += 1.0;
    }
    shift = std::log(prod);
  }
  const double z = 1.0 / (x * x);
  const double series =
      (1.0 / 12.0 +
       z * (-1.0 / 360.0 +
            z * (1.0 / 1260.0 +
                 z * (-1.0 / 1680.0 +
                      z * (1.0 / 1188.0 + z * (-691.0 / 360360.0 + z * (1.0 / 156.0))))))) /
      x;
  return (x - 0.5) * std::log(x) - x + 0.91893853320467274178 + series - shift;
}

inline double log_beta(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const int max_iter = 10000 + static_cast<int>(20.0 * std::sqrt(std::max(a, b)));
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  std::ostringstream msg;
  msg << "incomplete beta continued fraction did not converge (a=" << a << ", b=" << b
      << ", x=" << x << ")";
  throw NumericalError(msg.str());
}

// log B_x(a,b) through the continued fraction; valid (fast) for x <= a/(a+b).
inline double log_inc_beta_cf(double x, double a, double b) {
  return a * std::log(x) + b * std::log1p(-x) - std::log(a) + std::log(beta_cf(a, b, x));
}

}  // namespace detail

// log of the unregularized incomplete beta B_x(a,b) = int_0^x u^(a-1)(1-u)^(b-1) du.
inline double log_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("log_inc_beta: a and b must be positive");
  if (x <= 0.0) return -kInf;
  if (x >= 1.0) return log_beta(a, b);
  if (x <= a / (a + b)) return detail::log_inc_beta_cf(x, a, b);
  const double lb = log_beta(a, b);
  const double lc = detail::log_inc_beta_cf(1.0 - x, b, a);
  return lb + std::log1p(-std::exp(lc - lb));
}

// Riemann zeta for s > 1: partial sum plus Euler-Maclaurin tail.
inline double zeta(double s) {
  if (!(s > 1.0)) throw DomainError("zeta: s must exceed 1");
  constexpr int n = 10;
  double sum = 0.0;
  for (int k = 1; k < n; ++k) sum += std::pow(static_cast<double>(k), -s);
  const double N = n;
  sum += std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s);
  // B_{2k}/(2k)! for k = 1..6
  constexpr double coef[] = {1.0 / 12.0,          -1.0 / 720.0,         1.0 / 30240.0,
                             -1.0 / 1209600.0,    1.0 / 47900160.0,     -691.0 / 1307674368000.0};
  double rising = s;  // s (s+1) ... (s+2k-2)
  double power = std::pow(N, -s - 1.0);
  for (int k = 0; k < 6; ++k) {
    sum += coef[k] * rising * power;
    rising *= (s + 2 * k + 1) * (s + 2 * k + 2);
    power /= N * N;
  }
  return sum;
}

// Lower branch W_{-1}(x) for x in [-1/e, 0), by bisection on z e^z over [-50, -1].
inline double lambert_wm1(double x) {
  const double lo_val = -50.0 * std::exp(-50.0);
  if (!(x >= -std::exp(-1.0)) || !(x < 0.0) || x > lo_val) {
    throw DomainError("lambert_wm1: argument outside [-1/e, -50 e^-50]");
  }
  double lo = -50.0;
  double hi = -1.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    // z e^z decreases on this branch
    if (mid * std::exp(mid) > x) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Standard normal quantile: Acklam's rational approximation plus one Halley step.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -kInf;
    if (p == 1.0) return kInf;
    throw DomainError("normal_quantile: p outside [0,1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Largest point of [lo, hi] where a monotone predicate (true, then false) holds,
// to within tol or max_iter halvings. pred(lo) is assumed true.
template <class Pred>
double last_true(Pred pred, double lo, double hi, double tol = 1e-9, int max_iter = 200) {
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

// Minimizer of a unimodal function on [lo, hi] by golden-section search.
template <class F>
double golden_section_min(F f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qcs
