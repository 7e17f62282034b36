#pragma once

#include <cmath>
#include <limits>

#include "subopt/common.hpp"

namespace subopt {

namespace detail {

// Regularized lower incomplete gamma P(a, x): series for x < a+1,
// continued fraction for the upper tail otherwise.

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int it = 0; it < 500; ++it) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double fpmin = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(x)) {
    throw Error("regularized_gamma_p: invalid arguments");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_contfrac(a, x);
}

/// CDF of the chi-square distribution with dof degrees of freedom.
inline double chi2_cdf(int dof, double x) {
  return regularized_gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

/// Quantile x with P(dof/2, x/2) = q, solved by bracketed Newton iteration
/// to relative precision 1e-10.
inline double chi2_quantile(int dof, double q) {
  if (dof < 1) throw Error("chi2_quantile: dof must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw Error("chi2_quantile: q must be in (0,1)");

  const double a = 0.5 * static_cast<double>(dof);
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (chi2_cdf(dof, hi) < q) {
    hi *= 2.0;
    if (hi > 1e300) throw Error("chi2_quantile: bracket expansion failed");
  }

  double x = std::min(std::max(static_cast<double>(dof), 0.5 * hi * 0.5), hi * 0.99);
  const double log_norm = -std::lgamma(a) - a * std::log(2.0);
  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(dof, x) - q;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    // density of chi2_dof at x
    const double logpdf = log_norm + (a - 1.0) * std::log(x) - 0.5 * x;
    const double pdf = std::exp(logpdf);
    double next;
    if (pdf > 0.0 && std::isfinite(pdf)) {
      next = x - f / pdf;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    } else {
      next = 0.5 * (lo + hi);
    }
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-12 * std::max(x, 1e-300) || hi - lo <= 1e-12 * std::max(x, 1e-300)) {
      break;
    }
  }
  return x;
}

}  // namespace subopt
