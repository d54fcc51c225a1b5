#pragma once

#include <cmath>
#include <numbers>

namespace diffu {

/// Forward-mode dual number a + b·eps with eps^2 = 0. Nesting
/// Dual<Dual<double>> gives mixed second directional derivatives.
template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  constexpr Dual() = default;
  constexpr Dual(T value) : v(value), d(T{}) {}  // NOLINT(google-explicit-constructor)
  constexpr Dual(T value, T deriv) : v(value), d(deriv) {}

  constexpr Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  constexpr Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  constexpr Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  constexpr Dual& operator/=(const Dual& o) { *this = *this / o; return *this; }

  friend constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend constexpr Dual operator*(Dual a, const Dual& b) { return a *= b; }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
  }
  friend constexpr Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
};

/// Strips every dual layer and returns the primal value.
inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) { return primal(x.v); }

using std::cos;
using std::erf;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;
using std::tanh;

template <class T>
Dual<T> sin(const Dual<T>& x) { return {sin(x.v), cos(x.v) * x.d}; }
template <class T>
Dual<T> cos(const Dual<T>& x) { return {cos(x.v), -sin(x.v) * x.d}; }
template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.v);
  return {e, e * x.d};
}
template <class T>
Dual<T> log(const Dual<T>& x) { return {log(x.v), x.d / x.v}; }
template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T s = sqrt(x.v);
  return {s, x.d / (T(2.0) * s)};
}
template <class T>
Dual<T> tanh(const Dual<T>& x) {
  T t = tanh(x.v);
  return {t, (T(1.0) - t * t) * x.d};
}
template <class T>
Dual<T> erf(const Dual<T>& x) {
  const double c = 2.0 / std::sqrt(std::numbers::pi);
  return {erf(x.v), T(c) * exp(-(x.v * x.v)) * x.d};
}

}  // namespace diffu
