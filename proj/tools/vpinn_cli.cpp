// Command-line front end: training runs, Adam vs LS/Adam comparisons, and
// the operation-count benchmarks.

#include <iostream>

#include "CLI11.hpp"
#include "vpinn/cost_model.hpp"
#include "vpinn/driver.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string problem, optimizer, formulation, ad_mode;
  int width = 0, iters = -1;
  std::string modes, points;
  long seed = -1;
  double lambda = -2.0, lr = -1.0;
  std::string out;
};

void add_run_flags(CLI::App* app, CliOptions& o) {
  app->add_option("--config", o.config_path, "JSON config file; flags override its fields");
  app->add_option("--problem", o.problem, "problem id (see `vpinn problems`)");
  app->add_option("--optimizer", o.optimizer, "adam | ls-adam");
  app->add_option("--formulation", o.formulation, "weak | ultraweak");
  app->add_option("--ad-mode", o.ad_mode, "forward | backward (backward: benchmarks only)");
  app->add_option("--width", o.width, "hidden width N (three hidden layers)");
  app->add_option("--modes", o.modes, "test-space cut-off M, or M1xM2 in 2D");
  app->add_option("--points", o.points, "integration points K, or KxxKy in 2D");
  app->add_option("--iters", o.iters, "training iterations");
  app->add_option("--seed", o.seed, "run seed");
  app->add_option("--lambda", o.lambda, "LS regularization (default: 1e-8 |B|_F^2 / N)");
  app->add_option("--lr", o.lr, "Adam learning rate");
  app->add_option("--out", o.out, "output directory");
}

std::pair<long, long> parse_pair(const std::string& s, const char* what) {
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) return {std::stol(s), 0};
    return {std::stol(s.substr(0, x)), std::stol(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(std::string(what) + ": expected an integer or AxB, got " + s);
  }
}

vpinn::RunConfig build_config(const CliOptions& o) {
  vpinn::RunConfig cfg;
  if (!o.config_path.empty()) cfg = vpinn::RunConfig::load(o.config_path);
  if (!o.problem.empty()) cfg.problem = o.problem;
  if (!o.optimizer.empty()) cfg.optimizer = vpinn::optimizer_from_string(o.optimizer);
  if (!o.formulation.empty()) cfg.formulation = vpinn::formulation_from_string(o.formulation);
  if (!o.ad_mode.empty()) cfg.ad_mode = vpinn::ad_mode_from_string(o.ad_mode);
  if (o.width > 0) cfg.width = o.width;
  if (!o.modes.empty()) {
    auto [a, b] = parse_pair(o.modes, "--modes");
    cfg.modes1 = static_cast<int>(a);
    cfg.modes2 = static_cast<int>(b);
  }
  if (!o.points.empty()) {
    auto [a, b] = parse_pair(o.points, "--points");
    cfg.points1 = a;
    cfg.points2 = b;
  }
  if (o.iters >= 0) cfg.iters = o.iters;
  if (o.seed >= 0) cfg.seed = static_cast<uint64_t>(o.seed);
  if (o.lambda > -2.0) cfg.lambda = o.lambda;
  if (o.lr > 0.0) cfg.lr = o.lr;
  if (!o.out.empty()) cfg.out = o.out;
  cfg.resolve();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational PINN Poisson solver with a hybrid LS/Adam optimizer"};
  app.require_subcommand(1);

  CliOptions run_opts, cmp_opts;
  auto* run_cmd = app.add_subcommand("run", "train one configuration");
  add_run_flags(run_cmd, run_opts);
  auto* cmp_cmd =
      app.add_subcommand("compare", "train Adam and LS/Adam from identical initializations");
  add_run_flags(cmp_cmd, cmp_opts);

  auto* prob_cmd = app.add_subcommand("problems", "list registered problems");

  std::string bench_out = "ad_ratios.csv";
  auto* bad_cmd = app.add_subcommand("bench-ad", "gradient/evaluation op-count ratios per AD mode");
  bad_cmd->add_option("--out", bench_out, "output CSV path");
  int bad_depth = 5, bad_width = 1024;
  bad_cmd->add_option("--depth", bad_depth, "hidden layers before the output layer");
  bad_cmd->add_option("--hidden-width", bad_width, "hidden layer width");
  std::vector<int> bad_n = {1, 4, 16, 64, 256};
  bad_cmd->add_option("--n", bad_n, "output dimensions to sweep");

  std::string opt_out = "optimizer_ratios.csv";
  auto* bopt_cmd = app.add_subcommand(
      "bench-optimizer", "per-iteration op-count of LS/GD schemes vs the GD baseline");
  bopt_cmd->add_option("--out", opt_out, "output CSV path");
  int max_n = 256;
  bopt_cmd->add_option("--max-n", max_n, "largest N in the sweep (512 doubles the runtime)");
  long bench_seed = 1;
  bopt_cmd->add_option("--seed", bench_seed, "seed for parameters and batch");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto out = vpinn::run_experiment(build_config(run_opts));
      return out.diverged ? 1 : 0;
    }
    if (*cmp_cmd) {
      auto out = vpinn::compare_experiment(build_config(cmp_opts));
      return (out.adam.diverged || out.ls_adam.diverged) ? 1 : 0;
    }
    if (*prob_cmd) {
      for (const auto& id : vpinn::problem_ids()) {
        const auto& p = vpinn::get_problem(id);
        std::cout << id << "  (" << p.dim << "D, N=" << p.width << ", M=" << p.modes1;
        if (p.dim == 2) std::cout << "x" << p.modes2;
        std::cout << ", K=" << p.points1;
        if (p.dim == 2) std::cout << "x" << p.points2;
        std::cout << ")\n";
      }
      return 0;
    }
    if (*bad_cmd) {
      vpinn::AdSweepConfig cfg;
      cfg.depth = bad_depth;
      cfg.width = bad_width;
      cfg.n_values = bad_n;
      auto rows = vpinn::ad_ratio_sweep(cfg);
      vpinn::write_ad_ratio_csv(bench_out, rows);
      for (const auto& r : rows)
        std::cout << "d=" << r.d << " N=" << r.n << "  forward " << r.forward_ratio()
                  << "  backward " << r.backward_ratio() << "\n";
      std::cout << "wrote " << bench_out << "\n";
      return 0;
    }
    if (*bopt_cmd) {
      vpinn::OptimizerSweepConfig cfg;
      cfg.seed = static_cast<uint64_t>(bench_seed);
      cfg.n_values.clear();
      for (int n = 2; n <= max_n; n *= 2) cfg.n_values.push_back(n);
      auto rows = vpinn::optimizer_cost_sweep(cfg);
      vpinn::write_optimizer_csv(opt_out, rows);
      for (const auto& row : rows) {
        std::cout << "N=" << row.n;
        for (const auto& c : row.numerators)
          std::cout << "  " << vpinn::to_string(c.scheme) << " "
                    << double(c.total) / double(row.baseline.total);
        std::cout << "\n";
      }
      std::cout << "wrote " << opt_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
