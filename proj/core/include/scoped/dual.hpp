#pragma once

#include <cmath>

namespace scoped {

// First-order dual number v + d*e with e^2 = 0. Propagating one through a
// function yields the function value and its directional derivative.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double value) : v(value) {}  // NOLINT: implicit lift of constants
  constexpr Dual(double value, double tangent) : v(value), d(tangent) {}

  constexpr Dual& operator+=(Dual o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  constexpr Dual& operator-=(Dual o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  constexpr Dual& operator*=(Dual o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
};

constexpr Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
constexpr Dual operator-(Dual a) { return {-a.v, -a.d}; }
constexpr Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
constexpr Dual operator*(Dual a, double b) { return {a.v * b, a.d * b}; }
constexpr Dual operator*(double a, Dual b) { return {a * b.v, a * b.d}; }
constexpr Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
constexpr Dual operator/(Dual a, double b) { return {a.v / b, a.d / b}; }

inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(Dual a) {
  const double r = std::sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
inline Dual tanh(Dual a) {
  const double t = std::tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }

constexpr double value_of(double a) { return a; }
constexpr double value_of(Dual a) { return a.v; }

}  // namespace scoped
