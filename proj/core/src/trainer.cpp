#include "vpinn/trainer.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <malloc.h>

#include "vpinn/batched_net.hpp"
#include "vpinn/least_squares.hpp"

namespace vpinn {

void TrainingHistory::write_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(17);
  f << "iteration,train_loss,val_loss,error_sq,relative_error,ops,wall_seconds\n";
  for (const auto& r : records)
    f << r.iteration << ',' << r.train_loss << ',' << r.val_loss << ',' << r.error_sq << ','
      << r.relative_error << ',' << r.ops << ',' << r.wall_seconds << '\n';
}

MlpParameters init_for_config(const RunConfig& cfg) {
  const Problem& p = cfg.prob();
  Architecture arch = Architecture::experiment(p.dim, cfg.width);
  return init_parameters(arch, substream_seed(cfg.seed, "init"));
}

namespace {

Partition make_partition(PartitionKind kind, long cells) {
  return kind == PartitionKind::graded ? graded_partition(static_cast<int>(cells))
                                       : uniform_partition(static_cast<int>(cells));
}

QuadratureBatch draw_batch(const RunConfig& cfg, const Partition& px, const Partition* py,
                           RandomStream& rng) {
  if (!py) return sample_composite(px, rng);
  return sample_composite_2d(px, *py, rng);
}

}  // namespace

QuadratureBatch validation_batch(const RunConfig& cfg) {
  const Problem& p = cfg.prob();
  RandomStream rng(substream_seed(cfg.seed, "validation"));
  if (p.dim == 1) {
    Partition part = make_partition(p.partition, cfg.points1 * p.val_factor / 2);
    return sample_composite(part, rng);
  }
  Partition px = uniform_partition(static_cast<int>(cfg.points1 * p.val_factor / 2));
  Partition py = uniform_partition(static_cast<int>(cfg.points2 * p.val_factor / 2));
  return sample_composite_2d(px, py, rng);
}

TrainOutcome train(const RunConfig& cfg, const MlpParameters& init, bool want_spectra) {
  if (!cfg.resolved) throw std::logic_error("config must be resolved before training");
  if (cfg.ad_mode == AdMode::backward)
    throw std::invalid_argument(
        "backward spatial AD is available in the cost benchmarks only; training assembles "
        "trial gradients in forward mode");
  const Problem& prob = cfg.prob();
  const Basis basis = cfg.basis();
  const Formulation form = cfg.formulation;
  const bool lsgd = cfg.optimizer == OptimizerKind::ls_adam;
  const bool weak = form == Formulation::weak;

  TrainOutcome out;
  out.params = init;
  MlpParameters& params = out.params;
  if (params.arch.input_dim != prob.dim || params.arch.components() != cfg.width)
    throw std::invalid_argument("initial parameters do not match the configuration");

  // The loop cycles multi-MB buffers every iteration; keeping them in the
  // arena instead of fresh mmaps avoids page-zeroing on each pass.
  mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);

  CountScope scope;
  const auto t0 = std::chrono::steady_clock::now();

  // Fixed validation batch; its test tables, source vector and exact
  // gradients never change within the run.
  QuadratureBatch val_q = validation_batch(cfg);
  BasisTables val_tb = build_tables(basis, val_q);
  Eigen::VectorXd val_f(val_q.size());
  Eigen::MatrixXd val_gstar(val_q.size(), prob.dim);
  {
    std::array<double, 2> g{};
    for (Eigen::Index k = 0; k < val_q.size(); ++k) {
      std::array<double, 2> xp{val_q.points(k, 0), prob.dim == 2 ? val_q.points(k, 1) : 0.0};
      val_f(k) = prob.source(xp.data());
      prob.exact_grad(xp.data(), g.data());
      for (int c = 0; c < prob.dim; ++c) val_gstar(k, c) = g[c];
    }
  }
  Eigen::VectorXd val_l = assemble_load(val_f, val_tb, val_q);

  // Training-side fixed pieces.
  Partition px = make_partition(prob.dim == 1 ? prob.partition : PartitionKind::uniform,
                                cfg.points1 / 2);
  std::optional<Partition> py;
  if (prob.dim == 2) py = uniform_partition(static_cast<int>(cfg.points2 / 2));
  RandomStream train_rng(substream_seed(cfg.seed, "train"));

  const Eigen::Index n_alpha = static_cast<Eigen::Index>(params.alpha_count());
  const Eigen::Index n_theta = lsgd ? n_alpha : n_alpha + params.omega.size();
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  AdamState adam(n_theta, acfg);
  Eigen::VectorXd theta(n_theta), grad_theta(n_theta);

  BatchedStack stack;
  ParamGrads grads;
  Eigen::VectorXd u_vals, val_u;
  Eigen::MatrixXd grad_u, val_grad;
  Eigen::MatrixXd w_grad;
  Eigen::VectorXd w_val;
  std::array<Eigen::MatrixXd, 2> dgrad_mat;

  auto record_state = [&](int iter, double train_loss) {
    batched_scalar_gradient(params, val_q.points, val_u, val_grad);
    Eigen::VectorXd r_val = action_residual(val_u, val_grad, val_l, val_tb, val_q, form);
    count_op(Op::mul, static_cast<uint64_t>(r_val.size()));
    count_op(Op::add, static_cast<uint64_t>(r_val.size()) - 1);
    const double val_loss = r_val.squaredNorm();
    double err = 0.0;
    for (Eigen::Index k = 0; k < val_q.size(); ++k) {
      double d2 = 0.0;
      for (int c = 0; c < prob.dim; ++c) {
        const double diff = val_grad(k, c) - val_gstar(k, c);
        d2 += diff * diff;
      }
      err += val_q.weights(k) * d2;
    }
    count_op(Op::mul, static_cast<uint64_t>(val_q.size()) * (prob.dim + 1));
    count_op(Op::add, static_cast<uint64_t>(val_q.size()) * (2 * prob.dim));
    TrainingRecord rec;
    rec.iteration = iter;
    rec.train_loss = train_loss;
    rec.val_loss = val_loss;
    rec.error_sq = err;
    rec.relative_error = std::sqrt(err) / prob.norm_u();
    rec.ops = scope.counts().total();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.history.records.push_back(rec);
    out.final_relative_error = rec.relative_error;
  };

  double t_draw=0,t_tables=0,t_fwd=0,t_lsq=0,t_loss=0,t_val=0,t_bp=0,t_f=0;
  auto tick=[](){ return std::chrono::steady_clock::now(); };
  auto el=[](auto a, auto b){ return std::chrono::duration<double>(b-a).count(); };
  for (int t = 0; t <= cfg.iters; ++t) {
    auto c0=tick();
    QuadratureBatch q = draw_batch(cfg, px, py ? &*py : nullptr, train_rng);
    auto c1=tick(); t_draw+=el(c0,c1);
    BasisTables tb = build_tables(basis, q);
    auto c2=tick(); t_tables+=el(c1,c2);
    batched_forward(params, q.points, weak, stack);
    CutoffBatch cut = cutoff_batch(q.points);
    TrialSamples ts = trial_samples(stack, cut);
    auto c3=tick(); t_fwd+=el(c2,c3);

    Eigen::VectorXd f_vals(q.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      std::array<double, 2> xp{q.points(k, 0), prob.dim == 2 ? q.points(k, 1) : 0.0};
      f_vals(k) = prob.source(xp.data());
    }
    Eigen::VectorXd l = assemble_load(f_vals, tb, q);
    auto c4=tick(); t_f+=el(c3,c4);

    if (lsgd) {
      Eigen::MatrixXd b = assemble_matrix(ts, tb, q, form);
      double lam = cfg.lambda >= 0.0 ? cfg.lambda : default_lambda(b);
      try {
        params.omega = ls_solve(b, l, lam);
      } catch (const singular_system_error&) {
        const double fallback = default_lambda(b);
        std::cerr << "[train] singular LS system at iteration " << t
                  << "; retrying with lambda = " << fallback << "\n";
        params.omega = ls_solve(b, l, fallback);
      }
    }

    auto c5=tick(); t_lsq+=el(c4,c5);
    // Loss via the action form (the matrix is never applied to omega here).
    if (weak) {
      grad_u.resize(q.size(), prob.dim);
      for (int c = 0; c < prob.dim; ++c) {
        grad_u.col(c) = ts.grad[c] * params.omega;
        count_gemm(q.size(), params.omega.size(), 1);
      }
    } else {
      u_vals = ts.phi * params.omega;
      count_gemm(q.size(), params.omega.size(), 1);
    }
    Eigen::VectorXd r = action_residual(u_vals, grad_u, l, tb, q, form);
    count_op(Op::mul, static_cast<uint64_t>(r.size()));
    count_op(Op::add, static_cast<uint64_t>(r.size()) - 1);
    const double train_loss = r.squaredNorm();

    if (!std::isfinite(train_loss)) {
      out.diverged = true;
      std::cerr << "[train] non-finite loss at iteration " << t << "; stopping\n";
      break;
    }

    auto c6=tick(); t_loss+=el(c5,c6);
    if (want_spectra && t == 0)
      out.initial_spectrum =
          spectral_report(params, basis, prob.dim == 1 ? 4 : 2, val_q, form, prob.source);

    { auto ca=tick(); record_state(t, train_loss); auto cb=tick(); t_val+=el(ca,cb); }
    if (t == cfg.iters) break;
    auto c7=tick();

    // Reverse sweep over alpha (and omega for plain Adam) with omega held
    // constant where it came from the LS solve.
    residual_adjoints(r, tb, q, form, &w_grad, &w_val);
    grads.resize_like(params);
    const Eigen::Index nn = params.omega.size();
    if (weak) {
      for (int c = 0; c < prob.dim; ++c) {
        dgrad_mat[c] = w_grad.col(c) * params.omega.transpose();
        count_op(Op::mul, static_cast<uint64_t>(q.size()) * nn);
      }
      std::array<const Eigen::MatrixXd*, 2> dg{prob.dim > 0 ? &dgrad_mat[0] : nullptr,
                                               prob.dim > 1 ? &dgrad_mat[1] : nullptr};
      batched_backprop(params, stack, cut, nullptr, dg, grads);
      if (!lsgd) {
        for (int c = 0; c < prob.dim; ++c) {
          grads.omega.noalias() += ts.grad[c].transpose() * w_grad.col(c);
          count_gemm(nn, q.size(), 1, true);
        }
      }
    } else {
      Eigen::MatrixXd dphi = w_val * params.omega.transpose();
      count_op(Op::mul, static_cast<uint64_t>(q.size()) * nn);
      batched_backprop(params, stack, cut, &dphi, {nullptr, nullptr}, grads);
      if (!lsgd) {
        grads.omega.noalias() += ts.phi.transpose() * w_val;
        count_gemm(nn, q.size(), 1, true);
      }
    }

    theta.head(n_alpha) = flatten_alpha(params);
    Eigen::VectorXd ga;
    grads.flatten_alpha(ga);
    grad_theta.head(n_alpha) = ga;
    if (!lsgd) {
      theta.tail(nn) = params.omega;
      grad_theta.tail(nn) = grads.omega;
    }
    adam.step(theta, grad_theta);
    unflatten_alpha(theta.head(n_alpha), params);
    if (!lsgd) params.omega = theta.tail(nn);
    t_bp+=el(c7,tick());
  }
  std::cerr << "profile: draw="<<t_draw<<" tables="<<t_tables<<" fwd="<<t_fwd<<" f+l="<<t_f
            <<" lsq="<<t_lsq<<" loss="<<t_loss<<" val="<<t_val<<" bp="<<t_bp<<"\n";

  if (want_spectra && !out.diverged)
    out.final_spectrum =
        spectral_report(params, basis, prob.dim == 1 ? 4 : 2, val_q, form, prob.source);
  return out;
}

TrainOutcome train(const RunConfig& cfg, bool want_spectra) {
  return train(cfg, init_for_config(cfg), want_spectra);
}

}  // namespace vpinn
