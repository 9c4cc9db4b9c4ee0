#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vpinn/mlp.hpp"
#include "vpinn/rng.hpp"
#include "vpinn/tape.hpp"

using namespace vpinn;

namespace {

// Central finite difference of a scalar callable.
template <class F>
double central_diff(F&& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

bool close_rel(double a, double b, double rtol, double atol = 1e-9) {
  return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b)) + atol;
}

}  // namespace

TEST_CASE("dual arithmetic propagates exact derivatives for primitives") {
  RandomStream rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(0.5, 2.0);
    Dual<1> da = Dual<1>::seeded(a, 0);
    Dual<1> db(b);

    CHECK((da * db).t[0] == doctest::Approx(b).epsilon(1e-12));
    CHECK((da / db).t[0] == doctest::Approx(1.0 / b).epsilon(1e-12));
    CHECK((db / da).t[0] == doctest::Approx(-b / (a * a)).epsilon(1e-12));
    CHECK(tanh(da).t[0] == doctest::Approx(1.0 - std::tanh(a) * std::tanh(a)).epsilon(1e-12));
    CHECK(sin(da).t[0] == doctest::Approx(std::cos(a)).epsilon(1e-12));
    CHECK(cos(da).t[0] == doctest::Approx(-std::sin(a)).epsilon(1e-12));
    CHECK(exp(da).t[0] == doctest::Approx(std::exp(a)).epsilon(1e-12));
    CHECK(sqrt(Dual<1>::seeded(b, 0)).t[0] ==
          doctest::Approx(0.5 / std::sqrt(b)).epsilon(1e-12));
  }
}

TEST_CASE("forward, reverse and finite differences agree on every primitive") {
  // Composite of all supported primitives with two leaves.
  auto compose = [](auto x, auto y) {
    using std::tanh;
    using std::sin;
    using std::cos;
    using std::exp;
    using std::sqrt;
    auto t = tanh(x * y) + sin(x) * cos(y);
    auto u = exp(x / (y + y)) - sqrt(y);
    return t * u + (x - y) / y;
  };
  RandomStream rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const double x = rng.uniform(0.2, 1.8);
    const double y = rng.uniform(0.4, 1.6);
    // forward
    auto fx = compose(Dual<1>::seeded(x, 0), Dual<1>(y)).t[0];
    auto fy = compose(Dual<1>(x), Dual<1>::seeded(y, 0)).t[0];
    // reverse
    DTape tape;
    auto xv = tape.leaf(x);
    auto yv = tape.leaf(y);
    auto root = compose(xv, yv);
    std::vector<DTape::Var> leaves{xv, yv};
    auto grad = tape.gradient(root, leaves);
    // finite differences
    auto fd_x = central_diff([&](double t) { return compose(t, y); }, x);
    auto fd_y = central_diff([&](double t) { return compose(x, t); }, y);

    CHECK(close_rel(fx, grad[0], 1e-10));
    CHECK(close_rel(fy, grad[1], 1e-10));
    CHECK(close_rel(fx, fd_x, 1e-6));
    CHECK(close_rel(fy, fd_y, 1e-6));
  }
}

TEST_CASE("affine example: root = w x + b") {
  DTape tape;
  auto w = tape.leaf(1.5);
  auto b = tape.leaf(-0.25);
  auto x = tape.constant(2.0);
  auto root = w * x + b;
  std::vector<DTape::Var> leaves{w, b};
  auto g = tape.gradient(root, leaves);
  CHECK(g[0] == 2.0);
  CHECK(g[1] == 1.0);
}

TEST_CASE("gradient of variables off the path is zero") {
  DTape tape;
  auto a = tape.leaf(1.0);
  auto b = tape.leaf(2.0);
  auto root = a * a;
  std::vector<DTape::Var> leaves{b};
  auto g = tape.gradient(root, leaves);
  CHECK(g[0] == 0.0);
}

TEST_CASE("variables from another tape are rejected") {
  DTape t1, t2;
  auto a = t1.leaf(1.0);
  auto b = t2.leaf(2.0);
  CHECK_THROWS_AS(t1.add(a, b), tape_error);
  std::vector<DTape::Var> leaves{b};
  CHECK_THROWS_AS(t1.gradient(a, leaves), tape_error);
}

TEST_CASE("sweep cost is pruned to the root-target subgraph") {
  // Work hanging off the root but not upstream of the target must cost
  // nothing in the sweep; unwatched constants absorb no adjoint work.
  DTape tape;
  auto x = tape.leaf(0.7);
  auto c = tape.constant(1.3);
  auto dead = tape.leaf(0.4);
  auto root = x * c + x * x;
  (void)(dead * dead);  // disconnected from root
  std::vector<DTape::Var> leaves{x};
  CountScope s;
  auto g = tape.gradient(root, leaves);
  OpCounter n = s.stop();
  CHECK(g[0] == doctest::Approx(1.3 + 1.4));
  // mul edges into x: 3 muls; accumulations: 2 adds; nothing for dead or c.
  CHECK(n[Op::mul] == 3);
  CHECK(n[Op::add] == 2);
}

TEST_CASE("recording sweep differentiates through a first sweep") {
  // g(x) = d/dx (x^3) = 3x^2, then dg/dx = 6x via a second sweep.
  DTape tape;
  auto x = tape.leaf(0.9);
  auto root = x * x * x;
  std::vector<DTape::Var> xs{x};
  auto g = tape.gradient_recorded(root, xs);
  CHECK(g[0].value() == doctest::Approx(3 * 0.9 * 0.9).epsilon(1e-14));
  auto g2 = tape.gradient(g[0], xs);
  CHECK(g2[0] == doctest::Approx(6 * 0.9).epsilon(1e-14));
}

TEST_CASE("recording sweep matches the value sweep's arithmetic cost") {
  auto build = [](DTape& tape, DTape::Var x) {
    using std::tanh;
    auto y = tanh(x * x + x);
    return y * y / (x + tape.constant(2.0));
  };
  DTape t1;
  auto x1 = t1.leaf(0.37);
  auto r1 = build(t1, x1);
  std::vector<DTape::Var> s1{x1};
  CountScope c1;
  (void)t1.gradient(r1, s1);
  const uint64_t plain = c1.stop().total();

  DTape t2;
  auto x2 = t2.leaf(0.37);
  auto r2 = build(t2, x2);
  std::vector<DTape::Var> s2{x2};
  CountScope c2;
  (void)t2.gradient_recorded(r2, s2);
  const uint64_t recorded = c2.stop().total();
  CHECK(plain == recorded);
}

TEST_CASE("seeded sweep scales the gradient linearly") {
  DTape tape;
  auto x = tape.leaf(1.1);
  auto root = tanh(x * x);
  std::vector<DTape::Var> xs{x};
  auto g1 = tape.gradient(root, xs);
  auto g3 = tape.gradient(root, xs, 3.0);
  CHECK(g3[0] == doctest::Approx(3.0 * g1[0]).epsilon(1e-14));
}

TEST_CASE("reverse over forward yields mixed second derivatives") {
  // u(th, x) = tanh(th x) + th^2 x; g = du/dx via tangent; check d g / d th
  // against finite differences of the forward derivative.
  auto forward_dx = [](double th, double x) {
    auto r = tanh(Dual<1>(th) * Dual<1>::seeded(x, 0)) +
             Dual<1>(th) * Dual<1>(th) * Dual<1>::seeded(x, 0);
    return r.t[0];
  };
  const double th = 0.8, x = 0.6;
  Tape<Dual<1>> tape;
  auto thv = tape.leaf(Dual<1>(th));
  auto xv = tape.constant(Dual<1>::seeded(x, 0));
  auto root = tanh(thv * xv) + thv * thv * xv;
  std::vector<Tape<Dual<1>>::Var> leaves{thv};
  auto adj = tape.gradient(root, leaves);
  const double mixed = adj[0].t[0];
  const double fd = central_diff([&](double t) { return forward_dx(t, x); }, th);
  CHECK(close_rel(mixed, fd, 1e-6));
  // Value slot carries the plain parameter derivative of u.
  const double fd_v = central_diff(
      [&](double t) { return std::tanh(t * x) + t * t * x; }, th);
  CHECK(close_rel(adj[0].v, fd_v, 1e-6));
}

TEST_CASE("forward jacobian of f(x) = (x, x^2) at x = 3") {
  auto u = Dual<1>::seeded(3.0, 0);
  auto f0 = u;
  auto f1 = u * u;
  CHECK(f0.t[0] == 1.0);
  CHECK(f1.t[0] == 6.0);
}
