#include <cmath>

#include "doctest.h"
#include "vpinn/assembly.hpp"
#include "vpinn/rng.hpp"

using namespace vpinn;

namespace {

// Deterministic fine batch: uniform partition with midpoint-ish draws.
QuadratureBatch fine_batch_1d(int cells, uint64_t seed = 5) {
  RandomStream rng(seed);
  return sample_composite(uniform_partition(cells), rng);
}

// Trial samples for a hand-coded scalar trial replicated over n columns is
// not needed; tests build TrialSamples directly from closed-form functions.
TrialSamples hand_trial_1d(const QuadratureBatch& q, double (*val)(double),
                           double (*grad)(double)) {
  TrialSamples ts;
  ts.phi.resize(q.size(), 1);
  ts.grad[0].resize(q.size(), 1);
  ts.has_grad = true;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    ts.phi(k, 0) = val(q.points(k, 0));
    ts.grad[0](k, 0) = grad(q.points(k, 0));
  }
  return ts;
}

}  // namespace

TEST_CASE("weak matrix column for the trial sin(x) picks out mode one") {
  // b(sin, v_m) = int cos(x) m cos(mx)/(m sqrt(pi/2)) = sqrt(pi/2) delta_m1.
  Basis basis = Basis::one_d(8);
  QuadratureBatch q = fine_batch_1d(20000);
  BasisTables tb = build_tables(basis, q);
  TrialSamples ts = hand_trial_1d(
      q, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); });
  Eigen::MatrixXd b = assemble_matrix(ts, tb, q, Formulation::weak);
  CHECK(b(0, 0) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-7));
  for (int m = 2; m <= 8; ++m) CHECK(std::abs(b(m - 1, 0)) < 1e-7);
}

TEST_CASE("ultraweak matrix matches the weak one for a smooth trial") {
  Basis basis = Basis::one_d(8);
  QuadratureBatch q = fine_batch_1d(20000);
  BasisTables tb = build_tables(basis, q);
  TrialSamples ts = hand_trial_1d(
      q, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); });
  Eigen::MatrixXd bw = assemble_matrix(ts, tb, q, Formulation::weak);
  Eigen::MatrixXd bu = assemble_matrix(ts, tb, q, Formulation::ultraweak);
  CHECK(bu(0, 0) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-7));
  CHECK((bw - bu).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("weak vs ultraweak agreement improves under quadrature refinement") {
  Basis basis = Basis::one_d(6);
  auto dev = [&](int cells) {
    QuadratureBatch q = fine_batch_1d(cells, 7);
    BasisTables tb = build_tables(basis, q);
    TrialSamples ts = hand_trial_1d(
        q, [](double x) { return std::sin(2.0 * x) * 0.5; },
        [](double x) { return std::cos(2.0 * x); });
    Eigen::MatrixXd bw = assemble_matrix(ts, tb, q, Formulation::weak);
    Eigen::MatrixXd bu = assemble_matrix(ts, tb, q, Formulation::ultraweak);
    return (bw - bu).cwiseAbs().maxCoeff();
  };
  const double d1 = dev(100);
  const double d2 = dev(1600);
  CHECK(d2 < d1 / 16.0);  // at least the composite rule's second order
}

TEST_CASE("load vector of f = sin against mode one is sqrt(pi/2)") {
  Basis basis = Basis::one_d(4);
  QuadratureBatch q = fine_batch_1d(20000);
  BasisTables tb = build_tables(basis, q);
  Eigen::VectorXd f(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) f(k) = std::sin(q.points(k, 0));
  Eigen::VectorXd l = assemble_load(f, tb, q);
  CHECK(l(0) == doctest::Approx(std::sqrt(kPi / 2.0)).epsilon(1e-7));
}

TEST_CASE("tables match the pointwise basis formulas") {
  Basis b1 = Basis::one_d(12);
  QuadratureBatch q = fine_batch_1d(40, 3);
  BasisTables tb = build_tables(b1, q);
  for (Eigen::Index k = 0; k < q.size(); k += 11)
    for (int m = 1; m <= 12; m += 3) {
      const double x = q.points(k, 0);
      CHECK(tb.v(k, m - 1) == doctest::Approx(eval_basis(b1, m, x)).epsilon(1e-12));
      CHECK(tb.dv(k, m - 1) == doctest::Approx(eval_basis_grad1(b1, m, x)).epsilon(1e-12));
      CHECK(tb.lap(k, m - 1) == doctest::Approx(eval_basis_laplacian(b1, m, x)).epsilon(1e-12));
    }
}

TEST_CASE("2D assembly matches direct summation on a small instance") {
  Basis basis = Basis::two_d(3, 2);
  RandomStream rng(11);
  QuadratureBatch q = sample_composite_2d(uniform_partition(7), uniform_partition(5), rng);
  BasisTables tb = build_tables(basis, q);
  const int n = 2;
  TrialSamples ts;
  ts.has_grad = true;
  ts.phi.resize(q.size(), n);
  ts.grad[0].resize(q.size(), n);
  ts.grad[1].resize(q.size(), n);
  for (Eigen::Index k = 0; k < q.size(); ++k)
    for (int j = 0; j < n; ++j) {
      ts.phi(k, j) = rng.uniform(-1, 1);
      ts.grad[0](k, j) = rng.uniform(-1, 1);
      ts.grad[1](k, j) = rng.uniform(-1, 1);
    }
  for (Formulation form : {Formulation::weak, Formulation::ultraweak}) {
    Eigen::MatrixXd b = assemble_matrix(ts, tb, q, form);
    for (int m1 = 1; m1 <= 3; ++m1)
      for (int m2 = 1; m2 <= 2; ++m2)
        for (int j = 0; j < n; ++j) {
          double acc = 0.0;
          for (Eigen::Index k = 0; k < q.size(); ++k) {
            std::array<double, 2> xp{q.points(k, 0), q.points(k, 1)};
            if (form == Formulation::weak) {
              Eigen::VectorXd gv = eval_basis_grad(basis, m1, m2, xp);
              acc += q.weights(k) *
                     (ts.grad[0](k, j) * gv(0) + ts.grad[1](k, j) * gv(1));
            } else {
              acc -= q.weights(k) * ts.phi(k, j) * eval_basis_laplacian(basis, m1, m2, xp);
            }
          }
          CHECK(b(basis.flatten(m1, m2), j) == doctest::Approx(acc).epsilon(1e-11));
        }
  }
}

TEST_CASE("matrix route and action route agree to machine precision") {
  RandomStream rng(77);
  const int n = 4, m = 8;
  Basis basis = Basis::one_d(m);
  QuadratureBatch q = sample_composite(uniform_partition(32), rng);
  BasisTables tb = build_tables(basis, q);
  TrialSamples ts;
  ts.has_grad = true;
  ts.phi.resize(q.size(), n);
  ts.grad[0].resize(q.size(), n);
  for (Eigen::Index k = 0; k < q.size(); ++k)
    for (int j = 0; j < n; ++j) {
      ts.phi(k, j) = rng.uniform(-1, 1);
      ts.grad[0](k, j) = rng.uniform(-1, 1);
    }
  Eigen::VectorXd f(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) f(k) = std::sin(q.points(k, 0));
  Eigen::VectorXd l = assemble_load(f, tb, q);
  Eigen::VectorXd omega(n);
  for (int j = 0; j < n; ++j) omega(j) = rng.uniform(-1, 1);

  for (Formulation form : {Formulation::weak, Formulation::ultraweak}) {
    Eigen::MatrixXd b = assemble_matrix(ts, tb, q, form);
    const double matrix_loss = (b * omega - l).squaredNorm();
    Eigen::VectorXd u_vals = ts.phi * omega;
    Eigen::MatrixXd grad_u = ts.grad[0] * omega;
    Eigen::VectorXd r = action_residual(u_vals, grad_u, l, tb, q, form);
    CHECK(r.squaredNorm() ==
          doctest::Approx(matrix_loss).epsilon(1e-12));
  }
}

TEST_CASE("omega = 0 action loss equals |l|^2") {
  RandomStream rng(78);
  Basis basis = Basis::one_d(6);
  QuadratureBatch q = sample_composite(uniform_partition(16), rng);
  BasisTables tb = build_tables(basis, q);
  Eigen::VectorXd f(q.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) f(k) = std::sin(q.points(k, 0));
  Eigen::VectorXd l = assemble_load(f, tb, q);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(q.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(q.size(), 1);
  Eigen::VectorXd r = action_residual(u, g, l, tb, q, Formulation::weak);
  CHECK(r.squaredNorm() == doctest::Approx(l.squaredNorm()).epsilon(1e-14));
}

TEST_CASE("residual adjoints match a finite-difference probe of the loss") {
  RandomStream rng(99);
  Basis basis = Basis::one_d(5);
  QuadratureBatch q = sample_composite(uniform_partition(8), rng);
  BasisTables tb = build_tables(basis, q);
  Eigen::VectorXd l(5);
  for (int m = 0; m < 5; ++m) l(m) = rng.uniform(-1, 1);

  Eigen::VectorXd u(q.size());
  Eigen::MatrixXd g(q.size(), 1);
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    u(k) = rng.uniform(-1, 1);
    g(k, 0) = rng.uniform(-1, 1);
  }
  for (Formulation form : {Formulation::weak, Formulation::ultraweak}) {
    Eigen::VectorXd r = action_residual(u, g, l, tb, q, form);
    Eigen::MatrixXd w_grad;
    Eigen::VectorXd w_val;
    residual_adjoints(r, tb, q, form, &w_grad, &w_val);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < q.size(); k += 3) {
      auto loss_at = [&](double bump) {
        Eigen::VectorXd ub = u;
        Eigen::MatrixXd gb = g;
        if (form == Formulation::weak)
          gb(k, 0) += bump;
        else
          ub(k) += bump;
        return action_residual(ub, gb, l, tb, q, form).squaredNorm();
      };
      const double fd = (loss_at(h) - loss_at(-h)) / (2 * h);
      const double an = form == Formulation::weak ? w_grad(k, 0) : w_val(k);
      CHECK(an == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("spectral cumulative sum at M reproduces the loss") {
  Architecture arch = Architecture::experiment(1, 6);
  MlpParameters p = init_parameters(arch, 10);
  Basis basis = Basis::one_d(8);
  RandomStream rng(13);
  QuadratureBatch q = sample_composite(uniform_partition(64), rng);
  auto source = [](const double* x) { return std::sin(x[0]); };
  for (Formulation form : {Formulation::weak, Formulation::ultraweak}) {
    SpectralReport rep = spectral_report(p, basis, 4, q, form, source);
    REQUIRE(rep.coefficients.size() == 32);
    const double loss = loss_via_action(p, basis, q, form, source);
    CHECK(rep.cumulative(basis.count() - 1) == doctest::Approx(loss).epsilon(1e-12));
    // cumulative curve is non-decreasing
    for (int i = 1; i < rep.cumulative.size(); ++i)
      CHECK(rep.cumulative(i) >= rep.cumulative(i - 1));
  }
}

TEST_CASE("zero network spectral peak sits at the forcing frequency") {
  // u = 0 and u* = sin(4x) sin(x/2): the residual coefficients are -l(v_m),
  // whose analytic values peak at mode 4:
  //   l(v_m) = [20.25/(20.25-m^2) - 12.25/(12.25-m^2)] / (2 sqrt(pi/2)).
  Architecture arch = Architecture::experiment(1, 4);
  MlpParameters p = init_parameters(arch, 10);
  p.omega.setZero();
  Basis basis = Basis::one_d(8);
  RandomStream rng(21);
  QuadratureBatch q = sample_composite(uniform_partition(4096), rng);
  auto source = [](const double* x) {
    return 16.25 * std::sin(4.0 * x[0]) * std::sin(0.5 * x[0]) -
           4.0 * std::cos(4.0 * x[0]) * std::cos(0.5 * x[0]);
  };
  SpectralReport rep = spectral_report(p, basis, 4, q, Formulation::weak, source);
  int argmax = 0;
  for (int i = 0; i < rep.coefficients.size(); ++i)
    if (std::abs(rep.coefficients(i)) > std::abs(rep.coefficients(argmax))) argmax = i;
  CHECK(argmax == 3);  // mode 4
  for (int m = 1; m <= 8; ++m) {
    const double expected = (20.25 / (20.25 - double(m) * m) - 12.25 / (12.25 - double(m) * m)) /
                            (2.0 * std::sqrt(kPi / 2.0));
    CHECK(rep.coefficients(m - 1) == doctest::Approx(-expected).epsilon(1e-3));
  }
  // decay beyond the peak
  CHECK(std::abs(rep.coefficients(31)) < 0.1 * std::abs(rep.coefficients(3)));
}

TEST_CASE("2D spectral ordering puts the training block first") {
  Architecture arch = Architecture::experiment(2, 4);
  MlpParameters p = init_parameters(arch, 5);
  Basis basis = Basis::two_d(3, 2);
  RandomStream rng(31);
  QuadratureBatch q = sample_composite_2d(uniform_partition(24), uniform_partition(24), rng);
  auto source = [](const double* x) { return std::sin(x[0]) * std::sin(x[1]); };
  SpectralReport rep = spectral_report(p, basis, 2, q, Formulation::weak, source);
  const double loss = loss_via_action(p, basis, q, Formulation::weak, source);
  CHECK(rep.cumulative(basis.count() - 1) == doctest::Approx(loss).epsilon(1e-12));
  // First block must be exactly the training modes.
  Basis ext = basis.extended(2);
  for (int i = 0; i < basis.count(); ++i) {
    auto [m1, m2] = ext.unflatten(rep.order[i]);
    CHECK(m1 <= basis.m1);
    CHECK(m2 <= basis.m2);
  }
}

TEST_CASE("ultraweak assembly performs zero tangent-propagation work") {
  Architecture arch = Architecture::experiment(1, 8);
  MlpParameters p = init_parameters(arch, 10);
  Basis basis = Basis::one_d(16);
  RandomStream rng(41);
  QuadratureBatch q = sample_composite(uniform_partition(64), rng);
  auto source = [](const double* x) { return std::sin(x[0]); };
  CountScope s;
  AssembledSystem sys = assemble(p, basis, q, Formulation::ultraweak, source);
  OpCounter n = s.stop();
  CHECK(n.tangent_ops() == 0);
  CHECK(sys.b.rows() == 16);
  CHECK(sys.b.cols() == 8);

  CountScope s2;
  AssembledSystem sysw = assemble(p, basis, q, Formulation::weak, source);
  CHECK(s2.stop().tangent_ops() > 0);
  CHECK(sysw.b.rows() == 16);
}
