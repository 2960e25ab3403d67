#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "polarlens/error.hpp"

namespace polarlens::detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Standard normal cdf.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

// Normal quantile: coarse rational seed refined by Newton against erfc-based
// cdf; converges to machine precision in a handful of steps.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw ContractError("normal_quantile: p outside [0,1]");
  }
  if (p == 0.5) return 0.0;
  // seed: Bowling-style logistic approximation, good to ~1e-2
  double x = -std::log(1.0 / p - 1.0) / 1.702;
  for (int it = 0; it < 60; ++it) {
    double err = normal_cdf(x) - p;
    double d = normal_pdf(x);
    if (d <= 0.0) break;
    double step = err / d;
    // temper huge steps in the far tails
    if (step > 1.0) step = 1.0;
    if (step < -1.0) step = -1.0;
    x -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

// Regularized incomplete gamma, lower: P(a, x). Series for x < a+1, else
// 1 - continued fraction, both standard formulations.
inline double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ContractError("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

inline double chi2_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  return gamma_p(df / 2.0, x / 2.0);
}

inline double chi2_sf(double x, double df) { return 1.0 - chi2_cdf(x, df); }

// Regularized incomplete beta I_x(a, b) via the Lentz continued fraction.
inline double beta_inc(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw ContractError("beta_inc: bad shape");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto cf = [](double a_, double b_, double x_) {
    const double tiny = 1e-300;
    double qab = a_ + b_, qap = a_ + 1.0, qam = a_ - 1.0;
    double c = 1.0, d = 1.0 - qab * x_ / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
      double m2 = 2.0 * m;
      double aa = m * (b_ - m) * x_ / ((qam + m2) * (a_ + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a_ + m) * (qab + m) * x_ / ((a_ + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + aa / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
  };
  double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - lbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * cf(a, b, x) / a;
  }
  return 1.0 - front * cf(b, a, 1.0 - x) / b;
}

// Student t distribution.
inline double t_cdf(double t, double df) {
  if (df <= 0.0) throw ContractError("t_cdf: df must be positive");
  if (t == 0.0) return 0.5;
  double x = df / (df + t * t);
  double tail = 0.5 * beta_inc(df / 2.0, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

inline double t_sf(double t, double df) { return t_cdf(-t, df); }

inline double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw ContractError("t_quantile: p outside (0,1)");
  if (p == 0.5) return 0.0;
  double x = normal_quantile(p);  // seed from the normal limit
  if (df < 6.0) x *= 1.0 + (x * x + 1.0) / (4.0 * df);  // tail widening
  for (int it = 0; it < 80; ++it) {
    double err = t_cdf(x, df) - p;
    double lam = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                 0.5 * std::log(df * kPi) -
                 (df + 1.0) / 2.0 * std::log1p(x * x / df);
    double d = std::exp(lam);
    if (d <= 0.0) break;
    double step = err / d;
    double cap = 1.0 + std::abs(x);
    if (step > cap) step = cap;
    if (step < -cap) step = -cap;
    x -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
  }
  return x;
}

// Kolmogorov distribution survival function
// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // 1 - Q < 5e-16 here
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-18) break;
  }
  double q = 2.0 * sum;
  if (q < 0.0) q = 0.0;
  if (q > 1.0) q = 1.0;
  return q;
}

// Serialized p-values never collapse to exact zero.
inline double floor_p(double p) {
  if (p < 1e-300) return 1e-300;
  if (p > 1.0) return 1.0;
  return p;
}

}  // namespace polarlens::detail
