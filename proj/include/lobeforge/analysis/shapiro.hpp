#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lobeforge/analysis/special_functions.hpp"
#include "lobeforge/core/error.hpp"

namespace lobeforge {

struct ShapiroResult {
  double w = 0.0;
  double p_value = 0.0;
};

// Shapiro-Wilk normality test in Royston's formulation: expected normal
// order statistics give the ideal weight vector, the two (one for n <= 5)
// extreme weights are corrected by polynomials in 1/sqrt(n), and the W
// statistic maps to a normal deviate through a lognormal fit whose
// parameters are polynomials in n (small samples) or ln n (large).
inline ShapiroResult shapiro_wilk(std::vector<double> values) {
  int n = static_cast<int>(values.size());
  require(n >= 3, ErrorCode::SampleTooSmall, "normality test needs at least 3 values");
  require(n <= 2000, ErrorCode::SampleTooSmall,
          "normality test calibration only covers up to 2000 values");
  std::sort(values.begin(), values.end());
  require(values.back() > values.front(), ErrorCode::EmptyData,
          "normality test is undefined for zero-variance data");

  std::vector<double> m(n);
  double ssq_m = 0.0;
  for (int i = 0; i < n; ++i) {
    m[i] = normal_ppf((i + 1 - 0.375) / (n + 0.25));
    ssq_m += m[i] * m[i];
  }

  std::vector<double> a(n);
  if (n == 3) {
    a[0] = -std::sqrt(0.5);
    a[1] = 0.0;
    a[2] = std::sqrt(0.5);
  } else {
    double rms = std::sqrt(ssq_m);
    double u = 1.0 / std::sqrt(static_cast<double>(n));
    double c_n = m[n - 1] / rms;
    double a_n = c_n + 0.221157 * u - 0.147981 * u * u - 2.071190 * u * u * u +
                 4.434685 * u * u * u * u - 2.706056 * u * u * u * u * u;
    if (n > 5) {
      double c_n1 = m[n - 2] / rms;
      double a_n1 = c_n1 + 0.042981 * u - 0.293762 * u * u - 1.752461 * u * u * u +
                    5.682633 * u * u * u * u - 3.582633 * u * u * u * u * u;
      double phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1] - 2.0 * m[n - 2] * m[n - 2]) /
                   (1.0 - 2.0 * a_n * a_n - 2.0 * a_n1 * a_n1);
      double denom = std::sqrt(phi);
      for (int i = 2; i < n - 2; ++i) a[i] = m[i] / denom;
      a[n - 1] = a_n;
      a[n - 2] = a_n1;
      a[0] = -a_n;
      a[1] = -a_n1;
    } else {
      double phi = (ssq_m - 2.0 * m[n - 1] * m[n - 1]) / (1.0 - 2.0 * a_n * a_n);
      double denom = std::sqrt(phi);
      for (int i = 1; i < n - 1; ++i) a[i] = m[i] / denom;
      a[n - 1] = a_n;
      a[0] = -a_n;
    }
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double numerator = 0.0;
  double denominator = 0.0;
  for (int i = 0; i < n; ++i) {
    numerator += a[i] * values[i];
    denominator += (values[i] - mean) * (values[i] - mean);
  }
  ShapiroResult result;
  result.w = numerator * numerator / denominator;

  if (n == 3) {
    double p = 6.0 / M_PI * (std::asin(std::sqrt(result.w)) - std::asin(std::sqrt(0.75)));
    result.p_value = std::clamp(p, 0.0, 1.0);
    return result;
  }
  double z;
  if (n <= 11) {
    double gamma = -2.273 + 0.459 * n;
    double w_t = -std::log(gamma - std::log1p(-result.w));
    double mu = 0.5440 - 0.39978 * n + 0.025054 * n * n - 0.0006714 * n * n * n;
    double sigma = std::exp(1.3822 - 0.77857 * n + 0.062767 * n * n - 0.0020322 * n * n * n);
    z = (w_t - mu) / sigma;
  } else {
    double u = std::log(static_cast<double>(n));
    double mu = -1.5861 - 0.31082 * u - 0.083751 * u * u + 0.0038915 * u * u * u;
    double sigma = std::exp(-0.4803 - 0.082676 * u + 0.0030302 * u * u);
    z = (std::log1p(-result.w) - mu) / sigma;
  }
  result.p_value = std::clamp(1.0 - normal_cdf(z), 0.0, 1.0);
  return result;
}

}  // namespace lobeforge
