#include <cmath>

#include "doctest.h"
#include "vpinn/mlp.hpp"
#include "vpinn/quadrature.hpp"

using namespace vpinn;

TEST_CASE("uniform partition nodes") {
  Partition p = uniform_partition(4);
  REQUIRE(p.nodes.size() == 5);
  CHECK(p.nodes[0] == 0.0);
  CHECK(p.nodes[1] == doctest::Approx(kPi / 4));
  CHECK(p.nodes[2] == doctest::Approx(kPi / 2));
  CHECK(p.nodes[4] == kPi);
}

TEST_CASE("graded partition doubles towards the singular end") {
  Partition p = graded_partition(6);  // half = 3
  REQUIRE(p.nodes.size() == 7);
  CHECK(p.nodes[0] == 0.0);
  CHECK(p.nodes[1] == doctest::Approx(0.25));
  CHECK(p.nodes[2] == doctest::Approx(0.5));
  CHECK(p.nodes[3] == doctest::Approx(1.0));
  CHECK(p.nodes[6] == kPi);
  // Smallest cell adjoins x = 0.
  double smallest = 1e9;
  int arg = -1;
  for (int c = 0; c < p.cells(); ++c)
    if (p.nodes[c + 1] - p.nodes[c] < smallest) {
      smallest = p.nodes[c + 1] - p.nodes[c];
      arg = c;
    }
  CHECK(arg == 0);
}

TEST_CASE("deep graded partition stays within double range") {
  Partition p = graded_partition(2048);
  CHECK(p.nodes[1] >= std::exp2(-256.0) * 0.999);
  CHECK(p.nodes[1] > 0.0);
  p.validate();
}

TEST_CASE("weights sum to the domain measure for every draw") {
  RandomStream rng(8);
  Partition p = uniform_partition(100);
  for (int rep = 0; rep < 5; ++rep) {
    QuadratureBatch q = sample_composite(p, rng);
    CHECK(q.size() == 200);
    CHECK(q.total_weight() == doctest::Approx(kPi).epsilon(1e-14));
  }
  Partition g = graded_partition(64);
  QuadratureBatch qg = sample_composite(g, rng);
  CHECK(qg.total_weight() == doctest::Approx(kPi).epsilon(1e-14));

  QuadratureBatch q2 = sample_composite_2d(uniform_partition(8), uniform_partition(6), rng);
  CHECK(q2.size() == 4 * 8 * 6);
  CHECK(q2.total_weight() == doctest::Approx(kPi * kPi).epsilon(1e-13));
}

TEST_CASE("constant and linear integrands are integrated exactly") {
  RandomStream rng(17);
  for (int cells : {1, 7, 64}) {
    Partition p = uniform_partition(cells);
    for (int rep = 0; rep < 8; ++rep) {
      QuadratureBatch q = sample_composite(p, rng);
      CHECK(integrate(q, [](double) { return 1.0; }) == doctest::Approx(kPi).epsilon(1e-14));
      CHECK(integrate(q, [](double x) { return x; }) ==
            doctest::Approx(kPi * kPi / 2.0).epsilon(1e-12));
    }
  }
  // piecewise-linear with a kink on a partition node: |x - pi/2| on 16 cells
  Partition p = uniform_partition(16);
  for (int rep = 0; rep < 5; ++rep) {
    QuadratureBatch q = sample_composite(p, rng);
    CHECK(integrate(q, [](double x) { return std::abs(x - kPi / 2.0); }) ==
          doctest::Approx(kPi * kPi / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("2D product rule is exact for bilinear integrands") {
  RandomStream rng(23);
  Partition px = uniform_partition(9), py = uniform_partition(5);
  for (int rep = 0; rep < 5; ++rep) {
    QuadratureBatch q = sample_composite_2d(px, py, rng);
    CHECK(integrate(q, [](double, double) { return 1.0; }) ==
          doctest::Approx(kPi * kPi).epsilon(1e-13));
    CHECK(integrate(q, [](double x, double y) { return x * y; }) ==
          doctest::Approx(std::pow(kPi, 4) / 4.0).epsilon(1e-10));
  }
}

TEST_CASE("2D rule factorizes on separable integrands") {
  RandomStream rng(29);
  Partition px = uniform_partition(6), py = uniform_partition(4);
  QuadratureBatch q = sample_composite_2d(px, py, rng);
  auto g = [](double x) { return std::sin(x) + 0.2 * x; };
  auto h = [](double y) { return std::cos(y) + 1.0; };
  double qx = 0.0, qy = 0.0;
  for (Eigen::Index i = 0; i < q.axis[0].points.size(); ++i)
    qx += q.axis[0].weights(i) * g(q.axis[0].points(i));
  for (Eigen::Index j = 0; j < q.axis[1].points.size(); ++j)
    qy += q.axis[1].weights(j) * h(q.axis[1].points(j));
  const double q2 = integrate(q, [&](double x, double y) { return g(x) * h(y); });
  CHECK(q2 == doctest::Approx(qx * qy).epsilon(1e-12));
}

TEST_CASE("points stay inside their cells and mirror through midpoints") {
  RandomStream rng(31);
  Partition p = uniform_partition(12);
  QuadratureBatch q = sample_composite(p, rng);
  for (int c = 0; c < 12; ++c) {
    const double a = p.nodes[c], b = p.nodes[c + 1];
    const double x1 = q.points(2 * c, 0), x2 = q.points(2 * c + 1, 0);
    CHECK(x1 >= a);
    CHECK(x1 <= b);
    CHECK(x2 >= a);
    CHECK(x2 <= b);
    CHECK(x1 + x2 == doctest::Approx(a + b).epsilon(1e-13));
    CHECK(q.weights(2 * c) == doctest::Approx(0.5 * (b - a)));
    CHECK(q.weights(2 * c) > 0.0);
  }
}

TEST_CASE("estimator is unbiased for sin(3x) within monte-carlo error") {
  // E[Q] = int_0^pi sin(3x) dx = 2/3; check a 10^4-draw mean against a
  // 3-sigma band of the empirical standard error.
  RandomStream rng(1234);
  Partition p = uniform_partition(16);
  const int reps = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int r = 0; r < reps; ++r) {
    QuadratureBatch q = sample_composite(p, rng);
    const double v = integrate(q, [](double x) { return std::sin(3.0 * x); });
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / reps;
  const double var = (sumsq - reps * mean * mean) / (reps - 1);
  const double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - 2.0 / 3.0) <= 3.0 * se);
}

TEST_CASE("same stream state reproduces the same batch") {
  Partition p = uniform_partition(10);
  RandomStream a(99), b(99);
  QuadratureBatch qa = sample_composite(p, a);
  QuadratureBatch qb = sample_composite(p, b);
  CHECK(qa.points == qb.points);
  CHECK(qa.weights == qb.weights);
}
