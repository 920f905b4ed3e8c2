#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lobeforge/core/error.hpp"

namespace lobeforge {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Standard normal CDF through erfc, accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Inverse standard normal CDF. A rational tail estimate seeds Newton
// iteration on the CDF, which converges to machine precision in a few
// steps everywhere in (0, 1).
inline double normal_ppf(double p) {
  require(p > 0.0 && p < 1.0, ErrorCode::RangeError,
          "normal quantile requires a probability inside (0, 1)");
  double tail = std::min(p, 1.0 - p);
  double t = std::sqrt(-2.0 * std::log(tail));
  double z = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
  if (p < 0.5) z = -z;
  for (int i = 0; i < 6; ++i) {
    double err = normal_cdf(z) - p;
    double density = normal_pdf(z);
    if (density <= 0.0) break;
    double step = err / density;
    z -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with
// the modified Lentz algorithm.
inline double beta_continued_fraction(double a, double b, double x) {
  const double tiny = 1e-30;
  const double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  fail(ErrorCode::EigenIterationFailure, "incomplete beta fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, ErrorCode::RangeError, "beta parameters must be positive");
  require(x >= 0.0 && x <= 1.0, ErrorCode::RangeError, "beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                  a * std::log(x) + b * std::log1p(-x);
  double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - bt * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

// Survival function of the F distribution with (d1, d2) degrees of freedom.
inline double f_survival(double f, double d1, double d2) {
  require(d1 > 0.0 && d2 > 0.0, ErrorCode::RangeError, "F degrees of freedom must be positive");
  if (f <= 0.0) return 1.0;
  return regularized_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f));
}

namespace detail {

struct QuadratureRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights by Newton iteration on the Legendre
// recurrence. Computed once per order and cached.
inline const QuadratureRule& gauss_legendre(int n) {
  static QuadratureRule cache[65];
  require(n >= 2 && n <= 64, ErrorCode::RangeError, "unsupported quadrature order");
  QuadratureRule& rule = cache[n];
  if (!rule.nodes.empty()) return rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Integrates fn over [lo, hi] with composite Gauss-Legendre quadrature.
template <typename Fn>
double integrate(Fn&& fn, double lo, double hi, int segments, int order) {
  const QuadratureRule& rule = gauss_legendre(order);
  double total = 0.0;
  double h = (hi - lo) / segments;
  for (int s = 0; s < segments; ++s) {
    double a = lo + s * h;
    double mid = a + 0.5 * h;
    double half = 0.5 * h;
    double part = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
      part += rule.weights[i] * fn(mid + half * rule.nodes[i]);
    total += part * half;
  }
  return total;
}

// CDF of the range of k standard normal variates.
inline double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  double lo = -8.5;
  double hi = w + 8.5;
  int segments = std::max(24, static_cast<int>(std::ceil(hi - lo)));
  auto integrand = [w, k](double z) {
    double inner = normal_cdf(z) - normal_cdf(z - w);
    return normal_pdf(z) * std::pow(inner, k - 1);
  };
  double value = k * integrate(integrand, lo, hi, segments, 20);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace detail

// CDF of the studentized range statistic with k groups and nu error
// degrees of freedom: the distribution of range/s where the range is over
// k independent standard normals and nu s^2 is chi-squared. The scale
// factor is integrated against its chi density; very large nu collapses
// to the plain normal range.
inline double studentized_range_cdf(double q, int k, double nu) {
  require(k >= 2, ErrorCode::RangeError, "studentized range needs at least two groups");
  require(nu >= 1.0, ErrorCode::RangeError, "studentized range needs positive error df");
  if (q <= 0.0) return 0.0;
  if (nu > 5000.0) return detail::normal_range_cdf(q, k);

  double spread = 12.0 / std::sqrt(2.0 * nu);
  double lo = std::max(1e-9, 1.0 - spread);
  double hi = 1.0 + spread;
  double log_norm = std::log(2.0) + 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu);
  auto integrand = [&](double u) {
    double log_f = log_norm + (nu - 1.0) * std::log(u) - 0.5 * nu * u * u;
    return std::exp(log_f) * detail::normal_range_cdf(q * u, k);
  };
  int segments = std::max(48, static_cast<int>(std::ceil((hi - lo) * 16.0)));
  double value = detail::integrate(integrand, lo, hi, segments, 20);
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace lobeforge
