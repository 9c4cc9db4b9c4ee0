#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "vpinn/opcount.hpp"

namespace vpinn {

// Forward-mode scalar with W tangent components (one per seeded input
// direction). Arithmetic applies the chain rule exactly; every executed
// value and tangent operation is reported to the active counter, tangent
// work additionally to the tangent meta-counter.
template <std::size_t W>
struct Dual {
  double v = 0.0;
  std::array<double, W> t{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants lift implicitly
  Dual(double value, const std::array<double, W>& tan) : v(value), t(tan) {}

  static Dual seeded(double value, std::size_t direction) {
    Dual d(value);
    d.t[direction] = 1.0;
    return d;
  }
};

template <std::size_t W>
inline Dual<W> operator+(const Dual<W>& a, const Dual<W>& b) {
  count_op(Op::add, 1 + W);
  count_tangent(W);
  Dual<W> r(a.v + b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a.t[i] + b.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> operator-(const Dual<W>& a, const Dual<W>& b) {
  count_op(Op::add, 1 + W);
  count_tangent(W);
  Dual<W> r(a.v - b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a.t[i] - b.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> operator-(const Dual<W>& a) {
  count_op(Op::add, 1 + W);
  count_tangent(W);
  Dual<W> r(-a.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = -a.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> operator*(const Dual<W>& a, const Dual<W>& b) {
  count_op(Op::mul, 1 + 2 * W);
  count_op(Op::add, W);
  count_tangent(3 * W);
  Dual<W> r(a.v * b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a.t[i] * b.v + a.v * b.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> operator/(const Dual<W>& a, const Dual<W>& b) {
  // (a/b)' = (a' - (a/b) b') / b
  count_op(Op::div, 1 + W);
  count_op(Op::mul, W);
  count_op(Op::add, W);
  count_tangent(3 * W);
  Dual<W> r(a.v / b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = (a.t[i] - r.v * b.t[i]) / b.v;
  return r;
}

template <std::size_t W>
inline Dual<W> tanh(const Dual<W>& a) {
  count_op(Op::tanh, 1);
  count_op(Op::mul, 1 + W);
  count_op(Op::add, 1);
  count_tangent(W);
  Dual<W> r(std::tanh(a.v));
  const double dt = 1.0 - r.v * r.v;
  for (std::size_t i = 0; i < W; ++i) r.t[i] = dt * a.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> sin(const Dual<W>& a) {
  count_op(Op::sin, 1);
  count_op(Op::cos, 1);
  count_op(Op::mul, W);
  count_tangent(W);
  Dual<W> r(std::sin(a.v));
  const double dc = std::cos(a.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = dc * a.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> cos(const Dual<W>& a) {
  count_op(Op::cos, 1);
  count_op(Op::sin, 1);
  count_op(Op::mul, W);
  count_op(Op::add, W);
  count_tangent(2 * W);
  Dual<W> r(std::cos(a.v));
  const double ds = std::sin(a.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = -ds * a.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> exp(const Dual<W>& a) {
  count_op(Op::exp, 1);
  count_op(Op::mul, W);
  count_tangent(W);
  Dual<W> r(std::exp(a.v));
  for (std::size_t i = 0; i < W; ++i) r.t[i] = r.v * a.t[i];
  return r;
}

template <std::size_t W>
inline Dual<W> sqrt(const Dual<W>& a) {
  count_op(Op::sqrt, 1);
  count_op(Op::div, W);
  count_op(Op::mul, W);
  count_tangent(2 * W);
  Dual<W> r(std::sqrt(a.v));
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a.t[i] / (2.0 * r.v);
  return r;
}

// Mixed scalar/dual arithmetic: unseeded constants (network weights, fixed
// coefficients) touch only the value slot or scale the tangents, which is
// what keeps the forward-mode overhead at one extra tangent's worth of work.
template <std::size_t W>
inline Dual<W> operator*(double a, const Dual<W>& b) {
  count_op(Op::mul, 1 + W);
  count_tangent(W);
  Dual<W> r(a * b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a * b.t[i];
  return r;
}
template <std::size_t W>
inline Dual<W> operator*(const Dual<W>& a, double b) {
  return b * a;
}
template <std::size_t W>
inline Dual<W> operator+(const Dual<W>& a, double b) {
  count_op(Op::add, 1);
  Dual<W> r(a.v + b);
  r.t = a.t;
  return r;
}
template <std::size_t W>
inline Dual<W> operator+(double a, const Dual<W>& b) {
  return b + a;
}
template <std::size_t W>
inline Dual<W> operator-(const Dual<W>& a, double b) {
  count_op(Op::add, 1);
  Dual<W> r(a.v - b);
  r.t = a.t;
  return r;
}
template <std::size_t W>
inline Dual<W> operator-(double a, const Dual<W>& b) {
  count_op(Op::add, 1 + W);
  count_tangent(W);
  Dual<W> r(a - b.v);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = -b.t[i];
  return r;
}
template <std::size_t W>
inline Dual<W> operator/(const Dual<W>& a, double b) {
  count_op(Op::div, 1 + W);
  count_tangent(W);
  Dual<W> r(a.v / b);
  for (std::size_t i = 0; i < W; ++i) r.t[i] = a.t[i] / b;
  return r;
}

}  // namespace vpinn
