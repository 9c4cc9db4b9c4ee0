// Quadrature, assembly and least-squares criteria plus the constant-omega
// gradient identity.

#include <cmath>

#include "acceptance.hpp"
#include "vpinn/assembly.hpp"
#include "vpinn/batched_net.hpp"
#include "vpinn/least_squares.hpp"
#include "vpinn/rng.hpp"

namespace acceptance {

using namespace vpinn;

void criterion_7_quadrature(Criterion& c) {
  RandomStream rng(777);
  // exactness on per-cell-linear integrands for every draw, weights summing
  // to the domain measure
  for (int cells : {3, 16, 128}) {
    Partition p = uniform_partition(cells);
    for (int rep = 0; rep < 20; ++rep) {
      QuadratureBatch q = sample_composite(p, rng);
      const double w = q.total_weight();
      c.require(std::abs(w - kPi) < 1e-12, "weights sum ", w, " != pi (cells ", cells, ")");
      const double lin = integrate(q, [](double x) { return 2.0 * x - 1.0; });
      c.require(std::abs(lin - (kPi * kPi - kPi)) < 1e-12, "linear integral off: ", lin);
      const double kink = integrate(q, [](double x) { return std::abs(x - kPi / 2.0); });
      if (cells % 2 == 0)
        c.require(std::abs(kink - kPi * kPi / 4.0) < 1e-12, "piecewise-linear integral off");
    }
  }
  {
    Partition g = graded_partition(64);
    QuadratureBatch q = sample_composite(g, rng);
    c.require(std::abs(q.total_weight() - kPi) < 1e-12, "graded weights sum");
  }
  {
    QuadratureBatch q2 =
        sample_composite_2d(uniform_partition(12), uniform_partition(7), rng);
    c.require(std::abs(q2.total_weight() - kPi * kPi) < 1e-11, "2D weights sum");
    const double bil = integrate(q2, [](double x, double y) { return x * y; });
    c.require(std::abs(bil - std::pow(kPi, 4) / 4.0) < 1e-10, "bilinear integral off: ", bil);
  }

  // unbiasedness: mean of Q(sin 3x) over 1e4 draws within 3 standard errors
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
  const double se = std::sqrt((sumsq - reps * mean * mean) / (reps - 1) / reps);
  c.require(std::abs(mean - 2.0 / 3.0) <= 3.0 * se, "mean ", mean, " not within 3 se (", se,
            ") of 2/3");
  c.note("Q(sin 3x): mean ", mean, ", exact 2/3, standard error ", se);
}

void criterion_8_assembly(Criterion& c) {
  RandomStream rng(88);
  // matrix/action equivalence on random small instances
  for (int inst = 0; inst < 10; ++inst) {
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
      const double lm = (b * omega - l).squaredNorm();
      Eigen::VectorXd uv = ts.phi * omega;
      Eigen::MatrixXd gv = ts.grad[0] * omega;
      const double la = action_residual(uv, gv, l, tb, q, form).squaredNorm();
      c.require(std::abs(lm - la) <= 1e-12 * std::max(lm, la),
                "matrix/action mismatch: ", lm, " vs ", la);
    }
  }

  // weak vs ultraweak entries converge for a smooth hand-coded trial
  {
    Basis basis = Basis::one_d(8);
    auto dev = [&](int cells) {
      RandomStream r2(5);
      QuadratureBatch q = sample_composite(uniform_partition(cells), r2);
      BasisTables tb = build_tables(basis, q);
      TrialSamples ts;
      ts.has_grad = true;
      ts.phi.resize(q.size(), 1);
      ts.grad[0].resize(q.size(), 1);
      for (Eigen::Index k = 0; k < q.size(); ++k) {
        ts.phi(k, 0) = std::sin(q.points(k, 0));
        ts.grad[0](k, 0) = std::cos(q.points(k, 0));
      }
      return (assemble_matrix(ts, tb, q, Formulation::weak) -
              assemble_matrix(ts, tb, q, Formulation::ultraweak))
          .cwiseAbs()
          .maxCoeff();
    };
    const double d1 = dev(64), d2 = dev(256), d3 = dev(1024);
    c.require(d2 < d1 / 4.0 && d3 < d2 / 4.0,
              "weak/ultraweak deviation not converging: ", d1, " ", d2, " ", d3);
    c.note("weak vs ultraweak max entry deviation at 64/256/1024 cells: ", d1, " / ", d2, " / ",
           d3);
  }

  // Gram within 1e-4 of identity at M = 32 on a 1e5-point reference grid
  {
    Basis basis = Basis::one_d(32);
    Eigen::VectorXd pts, w;
    trapezoid_grid(100000, pts, w);
    Eigen::MatrixXd x(pts.size(), 1);
    x.col(0) = pts;
    const double dev =
        (gram_matrix(basis, x, w) - Eigen::MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff();
    c.require(dev < 1e-4, "gram deviation ", dev);
    c.note("max |G - I| at M = 32: ", dev);
  }
}

void criterion_9_least_squares(Criterion& c) {
  RandomStream rng(909);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 6 + static_cast<int>(rng.raw() % 40);
    const int n = 2 + static_cast<int>(rng.raw() % std::min(m - 1, 8));
    Eigen::MatrixXd b(m, n);
    Eigen::VectorXd l(m);
    for (int i = 0; i < m; ++i) {
      l(i) = rng.uniform(-3, 3);
      for (int j = 0; j < n; ++j) b(i, j) = rng.uniform(-3, 3);
    }
    const double lam = trial % 2 == 0 ? 1e-8 : std::abs(rng.uniform(0.0, 0.5));
    Eigen::VectorXd w = ls_solve(b, l, lam);
    const double res = (b.transpose() * (b * w - l) + lam * w).norm();
    const double bound = 1e-10 * std::max(1.0, (b.transpose() * l).norm());
    c.require(res <= bound, "optimality residual ", res, " > ", bound);
  }
  {
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd l(2);
    l << 1, 2;
    Eigen::VectorXd w = ls_solve(b, l, 0.0);
    c.require(std::abs(w(0) - 1.0) <= 1e-14 && std::abs(w(1) - 2.0) <= 1e-14,
              "identity system solution off");
  }
  {
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    Eigen::VectorXd l(1);
    l << 1.0;
    const double w = ls_solve(b, l, 1.0)(0);
    c.require(std::abs(w - 0.5) <= 1e-14, "1x1 lambda=1 solution ", w, " != 1/2");
  }
}

void criterion_10_partial_total(Criterion& c) {
  // Random small instances: N = 4, M = 8, fixed batch, lambda = 1e-12. The
  // reverse-mode gradient of L(alpha, omega_ls) with omega_ls constant must
  // match central finite differences of alpha -> min_omega L(alpha, omega)
  // at relative tolerance 1e-4.
  for (uint64_t seed : {11u, 22u, 33u}) {
    Architecture arch = Architecture::experiment(1, 4);
    MlpParameters p = init_parameters(arch, seed);
    Basis basis = Basis::one_d(8);
    RandomStream rng(substream_seed(seed, "c10"));
    QuadratureBatch q = sample_composite(uniform_partition(32), rng);
    BasisTables tb = build_tables(basis, q);
    Eigen::VectorXd f(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      const double x = q.points(k, 0);
      f(k) = 16.25 * std::sin(4 * x) * std::sin(x / 2) - 4.0 * std::cos(4 * x) * std::cos(x / 2);
    }
    Eigen::VectorXd l = assemble_load(f, tb, q);
    const double lam = 1e-12;

    auto min_loss = [&](const MlpParameters& pp) {
      BatchedStack stack;
      batched_forward(pp, q.points, true, stack);
      CutoffBatch cut = cutoff_batch(q.points);
      TrialSamples ts = trial_samples(stack, cut);
      Eigen::MatrixXd b = assemble_matrix(ts, tb, q, Formulation::weak);
      Eigen::VectorXd w = ls_solve(b, l, lam);
      return (b * w - l).squaredNorm();
    };

    BatchedStack stack;
    batched_forward(p, q.points, true, stack);
    CutoffBatch cut = cutoff_batch(q.points);
    TrialSamples ts = trial_samples(stack, cut);
    Eigen::MatrixXd b = assemble_matrix(ts, tb, q, Formulation::weak);
    Eigen::VectorXd w = ls_solve(b, l, lam);
    Eigen::MatrixXd grad_u = ts.grad[0] * w;
    Eigen::VectorXd r =
        action_residual(Eigen::VectorXd(), grad_u, l, tb, q, Formulation::weak);
    Eigen::MatrixXd w_grad;
    Eigen::VectorXd w_val;
    residual_adjoints(r, tb, q, Formulation::weak, &w_grad, &w_val);
    Eigen::MatrixXd dg = w_grad.col(0) * w.transpose();
    ParamGrads grads;
    grads.resize_like(p);
    std::array<const Eigen::MatrixXd*, 2> dgp{&dg, nullptr};
    batched_backprop(p, stack, cut, nullptr, dgp, grads);
    Eigen::VectorXd flat;
    grads.flatten_alpha(flat);

    Eigen::VectorXd alpha = flatten_alpha(p);
    // Step chosen so truncation (~h^2) sits well under the 1e-4 band while
    // rounding noise (~eps L / h) stays orders below it.
    const double h = 3e-6;
    const double scale = std::max(1e-12, flat.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < alpha.size(); i += 2) {
      MlpParameters pp = p, pm = p;
      Eigen::VectorXd ap = alpha, am = alpha;
      ap(i) += h;
      am(i) -= h;
      unflatten_alpha(ap, pp);
      unflatten_alpha(am, pm);
      const double fd = (min_loss(pp) - min_loss(pm)) / (2 * h);
      c.require(std::abs(fd - flat(i)) <= 1e-4 * scale, "seed ", seed, " component ", i,
                ": grad ", flat(i), " fd ", fd);
    }
  }
}

}  // namespace acceptance
