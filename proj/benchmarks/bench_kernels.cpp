// Microbenchmarks for the kernels that dominate training time.

#include <benchmark/benchmark.h>

#include "vpinn/assembly.hpp"
#include "vpinn/batched_net.hpp"
#include "vpinn/fast_math.hpp"
#include "vpinn/least_squares.hpp"
#include "vpinn/rng.hpp"
#include "vpinn/tape.hpp"

using namespace vpinn;

namespace {

void bm_fast_tanh(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(n, 64);
  for (auto _ : state) {
    Eigen::MatrixXd c = m;
    fast_tanh_inplace(c);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 64);
}
BENCHMARK(bm_fast_tanh)->Arg(1024)->Arg(16384);

void bm_batched_forward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const Eigen::Index k = state.range(1);
  MlpParameters p = init_parameters(Architecture::experiment(1, width), 1);
  Eigen::MatrixXd x(k, 1);
  RandomStream rng(2);
  for (Eigen::Index i = 0; i < k; ++i) x(i, 0) = rng.uniform(0.0, kPi);
  BatchedStack stack;
  for (auto _ : state) {
    batched_forward(p, x, true, stack);
    benchmark::DoNotOptimize(stack.h.back().data());
  }
  const double flops_per_iter = 2.0 * k * (2.0 * width * width + width) * 3.0;
  state.counters["gflops"] = benchmark::Counter(
      flops_per_iter * state.iterations() / 1e9, benchmark::Counter::kIsRate);
}
BENCHMARK(bm_batched_forward)->Args({64, 4096})->Args({128, 16384});

void bm_assemble_1d(benchmark::State& state) {
  const int n = 64, m = 128;
  const Eigen::Index k = 4096;
  MlpParameters p = init_parameters(Architecture::experiment(1, n), 1);
  RandomStream rng(3);
  QuadratureBatch q = sample_composite(uniform_partition(k / 2), rng);
  BatchedStack stack;
  batched_forward(p, q.points, true, stack);
  CutoffBatch cut = cutoff_batch(q.points);
  TrialSamples ts = trial_samples(stack, cut);
  BasisTables tb = build_tables(Basis::one_d(m), q);
  for (auto _ : state) {
    Eigen::MatrixXd b = assemble_matrix(ts, tb, q, Formulation::weak);
    benchmark::DoNotOptimize(b.data());
  }
}
BENCHMARK(bm_assemble_1d);

void bm_assemble_2d_separable(benchmark::State& state) {
  const int n = 32;
  MlpParameters p = init_parameters(Architecture::experiment(2, n), 1);
  RandomStream rng(4);
  QuadratureBatch q = sample_composite_2d(uniform_partition(64), uniform_partition(64), rng);
  BatchedStack stack;
  batched_forward(p, q.points, true, stack);
  CutoffBatch cut = cutoff_batch(q.points);
  TrialSamples ts = trial_samples(stack, cut);
  BasisTables tb = build_tables(Basis::two_d(8, 8), q);
  for (auto _ : state) {
    Eigen::MatrixXd b = assemble_matrix(ts, tb, q, Formulation::weak);
    benchmark::DoNotOptimize(b.data());
  }
}
BENCHMARK(bm_assemble_2d_separable);

void bm_ls_solve(benchmark::State& state) {
  const int m = 640, n = 128;
  RandomStream rng(5);
  Eigen::MatrixXd b(m, n);
  Eigen::VectorXd l(m);
  for (int i = 0; i < m; ++i) {
    l(i) = rng.uniform(-1, 1);
    for (int j = 0; j < n; ++j) b(i, j) = rng.uniform(-1, 1);
  }
  for (auto _ : state) {
    Eigen::VectorXd w = ls_solve(b, l, 1e-8);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(bm_ls_solve);

void bm_tape_sweep(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Architecture arch{1, {width, width, width}};
  MlpParameters p = init_parameters(arch, 1);
  for (auto _ : state) {
    DTape tape;
    tape.reserve(4 * p.alpha_count());
    std::vector<DTape::Var> leaves;
    auto lift = [&](double v) {
      leaves.push_back(tape.leaf(v));
      return leaves.back();
    };
    auto lift_c = [&](double v) { return tape.constant(v); };
    auto bp = bind_params<DTape::Var>(p, lift);
    std::array<DTape::Var, 1> x{tape.constant(1.0)};
    auto root = eval_scalar_generic<DTape::Var>(bp, x, lift_c);
    auto g = tape.gradient(root, leaves);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(bm_tape_sweep)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
