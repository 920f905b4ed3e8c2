#pragma once

#include <cmath>

namespace lobeforge {

// Forward-mode dual number carrying one derivative channel. Element Hessians
// are obtained by running the analytic element gradients on Dual arguments,
// one seeded direction per degree of freedom. This keeps second derivatives
// machine-exact without hand-deriving Hessian expressions.
struct Dual {
  double a = 0.0;  // value
  double b = 0.0;  // derivative

  Dual() = default;
  Dual(double value) : a(value) {}
  Dual(double value, double deriv) : a(value), b(deriv) {}
};

inline Dual operator+(Dual x, Dual y) { return {x.a + y.a, x.b + y.b}; }
inline Dual operator-(Dual x, Dual y) { return {x.a - y.a, x.b - y.b}; }
inline Dual operator-(Dual x) { return {-x.a, -x.b}; }
inline Dual operator*(Dual x, Dual y) { return {x.a * y.a, x.a * y.b + x.b * y.a}; }
inline Dual operator/(Dual x, Dual y) {
  double inv = 1.0 / y.a;
  double v = x.a * inv;
  return {v, (x.b - v * y.b) * inv};
}

inline Dual operator+(Dual x, double c) { return {x.a + c, x.b}; }
inline Dual operator+(double c, Dual x) { return {c + x.a, x.b}; }
inline Dual operator-(Dual x, double c) { return {x.a - c, x.b}; }
inline Dual operator-(double c, Dual x) { return {c - x.a, -x.b}; }
inline Dual operator*(Dual x, double c) { return {x.a * c, x.b * c}; }
inline Dual operator*(double c, Dual x) { return {c * x.a, c * x.b}; }
inline Dual operator/(Dual x, double c) { return {x.a / c, x.b / c}; }
inline Dual operator/(double c, Dual x) {
  double inv = 1.0 / x.a;
  double v = c * inv;
  return {v, -v * x.b * inv};
}

inline bool operator<(Dual x, Dual y) { return x.a < y.a; }
inline bool operator>(Dual x, Dual y) { return x.a > y.a; }

inline Dual sqrt(Dual x) {
  double r = std::sqrt(x.a);
  return {r, x.b / (2.0 * r)};
}

inline Dual atan2(Dual y, Dual x) {
  double denom = x.a * x.a + y.a * y.a;
  return {std::atan2(y.a, x.a), (x.a * y.b - y.a * x.b) / denom};
}

// Scalar access helpers so element kernels can be written once for double
// and Dual alike.
inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.a; }

}  // namespace lobeforge
