#include "vpinn/cost_model.hpp"

#include <fstream>
#include <memory>

#include "vpinn/least_squares.hpp"
#include "vpinn/adam.hpp"
#include "vpinn/rng.hpp"
#include "vpinn/tape.hpp"

namespace vpinn {

const char* to_string(IterationScheme s) {
  switch (s) {
    case IterationScheme::gd_weak_backward: return "gd-weak-backward";
    case IterationScheme::lsgd_ultraweak: return "lsgd-ultraweak";
    case IterationScheme::lsgd_weak_forward: return "lsgd-weak-forward";
    case IterationScheme::lsgd_weak_backward: return "lsgd-weak-backward";
  }
  return "?";
}

namespace {

// Runs fn once inside a child scope and books its counts factor times in
// total. Exact whenever every repetition executes the identical op sequence,
// which holds for per-point network work (no data-dependent branching).
template <class F>
void run_scaled(uint64_t factor, F&& fn) {
  CountScope s;
  fn();
  OpCounter c = s.stop();
  if (factor > 1)
    if (OpCounter* p = detail::active_counter()) p->merge_scaled(c, factor - 1);
}

// Counted 1D test-function tables (row-major K x M).
struct RefTables {
  long k = 0;
  int m = 0;
  std::vector<Cd> v, dv, lap;
  const Cd& at(const std::vector<Cd>& t, long kk, int mm) const { return t[kk * m + mm]; }
};

RefTables ref_tables(const Eigen::MatrixXd& pts, int modes, bool need_dv, bool need_lap) {
  RefTables tb;
  tb.k = pts.rows();
  tb.m = modes;
  tb.v.resize(tb.k * modes);
  if (need_dv) tb.dv.resize(tb.k * modes);
  if (need_lap) tb.lap.resize(tb.k * modes);
  const double c0 = 1.0 / std::sqrt(kPi / 2.0);
  std::vector<Cd> s(modes), c(modes);
  for (long kk = 0; kk < tb.k; ++kk) {
    Cd x(pts(kk, 0));
    s[0] = sin(x);
    c[0] = cos(x);
    for (int mm = 1; mm < modes; ++mm) {
      s[mm] = s[mm - 1] * c[0] + c[mm - 1] * s[0];
      c[mm] = c[mm - 1] * c[0] - s[mm - 1] * s[0];
    }
    for (int mm = 0; mm < modes; ++mm) {
      tb.v[kk * modes + mm] = s[mm] * Cd(1.0 / ((mm + 1) * std::sqrt(kPi / 2.0)));
      if (need_dv) tb.dv[kk * modes + mm] = c[mm] * Cd(c0);
      if (need_lap) tb.lap[kk * modes + mm] = s[mm] * Cd(-(mm + 1) * c0);
    }
  }
  return tb;
}

// Benchmark source term; the sweep's ratios are problem-independent, so a
// one-op integrand keeps the accounting clean.
Cd bench_source(Cd x) { return sin(x); }

std::vector<Cd> ref_load(const RefTables& tb, const Eigen::VectorXd& gamma,
                         const std::vector<Cd>& f) {
  std::vector<Cd> fw(tb.k), l(tb.m);
  for (long k = 0; k < tb.k; ++k) fw[k] = Cd(gamma(k)) * f[k];
  for (int m = 0; m < tb.m; ++m) {
    Cd acc = fw[0] * tb.v[0 * tb.m + m];
    for (long k = 1; k < tb.k; ++k) acc += fw[k] * tb.v[k * tb.m + m];
    l[m] = acc;
  }
  return l;
}

struct TapePoint {
  std::unique_ptr<DTape> tape;
  std::vector<DTape::Var> leaves;          // watched parameters (order = flatten_alpha)
  DTape::Var root;                         // scalar output or recorded spatial gradient
};

struct DualTapePoint {
  using T = Tape<Dual<1>>;
  std::unique_ptr<T> tape;
  std::vector<T::Var> leaves;
  T::Var root;
};

}  // namespace

IterationCost counted_iteration(IterationScheme scheme, const MlpParameters& params,
                                const Basis& basis, const QuadratureBatch& batch,
                                bool representative, IterationValues* values) {
  if (params.arch.input_dim != 1 || basis.dim != 1)
    throw std::invalid_argument("cost accounting is defined for the 1D setting");
  if (!representative && values == nullptr)
    throw std::invalid_argument("full execution should also report values");

  const int n = params.arch.components();
  const int m = basis.m1;
  const long k = batch.size();
  const bool weak = scheme != IterationScheme::lsgd_ultraweak;
  const bool lsgd = scheme != IterationScheme::gd_weak_backward;

  IterationCost cost;
  cost.scheme = scheme;
  cost.n = n;
  cost.m = m;
  cost.k = k;

  // Reference network cost: one scalar evaluation, counted out-of-band.
  {
    CountScope cs;
    auto bp = bind_params<Cd>(params, [](double v) { return Cd(v); });
    std::array<Cd, 1> x{Cd(batch.points(0, 0))};
    (void)eval_scalar_generic<Cd>(bp, x, [](double v) { return Cd(v); });
    cost.c_net = cs.stop().total();
  }

  RandomStream synth(substream_seed(1234, "cost-synthetic"));
  CountScope scope;

  // --- load vector and tables -----------------------------------------------
  RefTables tb = ref_tables(batch.points, m, weak, !weak);
  std::vector<Cd> f(k);
  for (long kk = 0; kk < k; ++kk) f[kk] = bench_source(Cd(batch.points(kk, 0)));
  std::vector<Cd> l = ref_load(tb, batch.weights, f);

  // --- step 1: trial evaluations over the batch ------------------------------
  Eigen::MatrixXd trial(k, n);  // grad u_n (weak) or u_n values (ultraweak)
  MlpParameters work = params;  // omega gets replaced by the LS solution
  uint64_t vect_net = 0;

  auto lift_cd = [](double v) { return Cd(v); };
  if (lsgd) {
    CountScope s1;
    switch (scheme) {
      case IterationScheme::lsgd_ultraweak: {
        auto one_point = [&](long kk) {
          auto bp = bind_params<Cd>(params, lift_cd, false);
          std::array<Cd, 1> x{Cd(batch.points(kk, 0))};
          auto u = eval_components_generic<Cd>(bp, x, lift_cd);
          for (int j = 0; j < n; ++j) trial(kk, j) = u[j].v;
        };
        if (representative) {
          run_scaled(k, [&] { one_point(0); });
          for (long kk = 0; kk < k; ++kk)
            for (int j = 0; j < n; ++j) trial(kk, j) = synth.uniform(-1.0, 1.0);
        } else {
          for (long kk = 0; kk < k; ++kk) one_point(kk);
        }
        break;
      }
      case IterationScheme::lsgd_weak_forward: {
        auto lift_d = [](double v) { return v; };
        auto one_point = [&](long kk) {
          auto bp = bind_params<Dual<1>>(params, lift_d, false);
          std::array<Dual<1>, 1> x{Dual<1>::seeded(batch.points(kk, 0), 0)};
          auto u = eval_components_generic<Dual<1>>(bp, x, lift_d);
          for (int j = 0; j < n; ++j) trial(kk, j) = u[j].t[0];
        };
        if (representative) {
          run_scaled(k, [&] { one_point(0); });
          for (long kk = 0; kk < k; ++kk)
            for (int j = 0; j < n; ++j) trial(kk, j) = synth.uniform(-1.0, 1.0);
        } else {
          for (long kk = 0; kk < k; ++kk) one_point(kk);
        }
        break;
      }
      case IterationScheme::lsgd_weak_backward: {
        auto one_point = [&](long kk) {
          DTape tape;
          tape.reserve(3 * params.alpha_count());
          auto lift_c = [&](double v) { return tape.constant(v); };
          auto bp = bind_params<DTape::Var>(params, lift_c, false);
          std::array<DTape::Var, 1> x{tape.leaf(batch.points(kk, 0))};
          auto u = eval_components_generic<DTape::Var>(bp, x, lift_c);
          std::array<DTape::Var, 1> xs{x[0]};
          for (int j = 0; j < n; ++j) {
            auto g = tape.gradient(u[j], xs);
            trial(kk, j) = g[0];
          }
        };
        if (representative) {
          run_scaled(k, [&] { one_point(0); });
          for (long kk = 0; kk < k; ++kk)
            for (int j = 0; j < n; ++j) trial(kk, j) = synth.uniform(-1.0, 1.0);
        } else {
          for (long kk = 0; kk < k; ++kk) one_point(kk);
        }
        break;
      }
      default:
        break;
    }
    vect_net = s1.counts().total();
  } else {
    vect_net = cost.c_net * static_cast<uint64_t>(k);
  }
  cost.vect_net = vect_net;

  // --- step 2: B, lambda, LS solve -------------------------------------------
  if (lsgd) {
    const auto& col = weak ? tb.dv : tb.lap;
    std::vector<Cd> tw(k * n);
    for (long kk = 0; kk < k; ++kk)
      for (int j = 0; j < n; ++j) tw[kk * n + j] = Cd(batch.weights(kk)) * Cd(trial(kk, j));
    Eigen::MatrixXd bmat(m, n);
    for (int mm = 0; mm < m; ++mm)
      for (int j = 0; j < n; ++j) {
        Cd acc = tw[0 * n + j] * col[0 * m + mm];
        for (long kk = 1; kk < k; ++kk) acc += tw[kk * n + j] * col[kk * m + mm];
        if (!weak) acc = -acc;
        bmat(mm, j) = acc.v;
      }
    // Scale-relative regularizer 1e-8 ||B||_F^2 / N.
    Cd fro = Cd(bmat(0, 0)) * Cd(bmat(0, 0));
    for (Eigen::Index i = 1; i < bmat.size(); ++i)
      fro += Cd(bmat.data()[i]) * Cd(bmat.data()[i]);
    Cd lam = Cd(1e-8) * fro / Cd(static_cast<double>(n));
    Eigen::VectorXd lvec(m);
    for (int mm = 0; mm < m; ++mm) lvec(mm) = l[mm].v;
    auto omega_cd = householder_ls_solve<Cd>(bmat, lvec, lam.v);
    for (int j = 0; j < n; ++j) work.omega(j) = omega_cd[j].v;
    if (values) values->omega = work.omega;
  }

  // --- step 3: loss re-evaluation and parameter sweep ------------------------
  // Per-point scalar quantity q entering the residual: grad u(x_k) for the
  // weak forms, u(x_k) for ultraweak.
  Eigen::VectorXd q(k);
  std::vector<TapePoint> points;
  std::vector<DualTapePoint> dual_points;

  auto build_point_plain = [&](long kk, bool record_spatial) {
    TapePoint tp;
    tp.tape = std::make_unique<DTape>();
    tp.tape->reserve((record_spatial ? 6 : 3) * params.alpha_count());
    DTape& tape = *tp.tape;
    auto lift_leaf = [&](double v) {
      tp.leaves.push_back(tape.leaf(v));
      return tp.leaves.back();
    };
    auto lift_c = [&](double v) { return tape.constant(v); };
    auto bp = bind_params<DTape::Var>(params, lift_leaf, false);
    bp.omega.reserve(n);
    for (int j = 0; j < n; ++j) {
      // GD differentiates omega too; the LS schemes treat it as a constant.
      if (lsgd)
        bp.omega.push_back(tape.constant(work.omega(j)));
      else
        bp.omega.push_back(lift_leaf(work.omega(j)));
    }
    std::array<DTape::Var, 1> x{tape.leaf(batch.points(kk, 0))};
    DTape::Var root = eval_scalar_generic<DTape::Var>(bp, x, lift_c);
    if (record_spatial) {
      std::array<DTape::Var, 1> xs{x[0]};
      auto g = tape.gradient_recorded(root, xs);
      tp.root = g[0];
    } else {
      tp.root = root;
    }
    return tp;
  };

  auto build_point_dual = [&](long kk) {
    DualTapePoint tp;
    tp.tape = std::make_unique<Tape<Dual<1>>>();
    tp.tape->reserve(3 * params.alpha_count());
    auto& tape = *tp.tape;
    auto lift_leaf = [&](double v) {
      tp.leaves.push_back(tape.leaf(Dual<1>(v)));
      return tp.leaves.back();
    };
    auto lift_c = [&](double v) { return tape.constant(Dual<1>(v)); };
    auto bp = bind_params<Tape<Dual<1>>::Var>(params, lift_leaf, false);
    bp.omega.reserve(n);
    for (int j = 0; j < n; ++j) bp.omega.push_back(tape.constant(Dual<1>(work.omega(j))));
    std::array<Tape<Dual<1>>::Var, 1> x{tape.constant(Dual<1>::seeded(batch.points(kk, 0), 0))};
    tp.root = eval_scalar_generic<Tape<Dual<1>>::Var>(bp, x, lift_c);
    return tp;
  };

  const bool record_spatial = scheme == IterationScheme::gd_weak_backward ||
                              scheme == IterationScheme::lsgd_weak_backward;
  const bool dual_reval = scheme == IterationScheme::lsgd_weak_forward;

  if (representative) {
    for (long kk = 0; kk < k; ++kk) q(kk) = synth.uniform(-1.0, 1.0);
    // Build + sweep once, scaled by K. Seed values do not change counts.
    run_scaled(k, [&] {
      if (dual_reval) {
        DualTapePoint tp = build_point_dual(0);
        (void)tp.tape->gradient(tp.root, tp.leaves, Dual<1>(1.0));
      } else {
        TapePoint tp = build_point_plain(0, record_spatial);
        (void)tp.tape->gradient(tp.root, tp.leaves);
      }
    });
  } else {
    if (dual_reval) {
      for (long kk = 0; kk < k; ++kk) {
        dual_points.push_back(build_point_dual(kk));
        q(kk) = dual_points.back().root.value().t[0];
      }
    } else {
      for (long kk = 0; kk < k; ++kk) {
        points.push_back(build_point_plain(kk, record_spatial));
        q(kk) = points.back().root.value();
      }
    }
  }

  // Residual, loss and the adjoints feeding each point's sweep.
  const auto& col3 = weak ? tb.dv : tb.lap;
  std::vector<Cd> hq(k), r(m);
  for (long kk = 0; kk < k; ++kk) hq[kk] = Cd(batch.weights(kk)) * Cd(q(kk));
  for (int mm = 0; mm < m; ++mm) {
    Cd acc = hq[0] * col3[0 * m + mm];
    for (long kk = 1; kk < k; ++kk) acc += hq[kk] * col3[kk * m + mm];
    if (!weak) acc = -acc;
    r[mm] = acc - l[mm];
  }
  Cd loss = r[0] * r[0];
  for (int mm = 1; mm < m; ++mm) loss += r[mm] * r[mm];
  if (values) values->loss = loss.v;

  std::vector<Cd> dr(m);
  for (int mm = 0; mm < m; ++mm) dr[mm] = Cd(2.0) * r[mm];
  Eigen::VectorXd dq(k);
  for (long kk = 0; kk < k; ++kk) {
    Cd acc = dr[0] * col3[kk * m + 0];
    for (int mm = 1; mm < m; ++mm) acc += dr[mm] * col3[kk * m + mm];
    if (!weak) acc = -acc;
    acc = acc * Cd(batch.weights(kk));
    dq(kk) = acc.v;
  }

  if (!representative) {
    const Eigen::Index n_alpha = static_cast<Eigen::Index>(params.alpha_count());
    values->grad_alpha = Eigen::VectorXd::Zero(n_alpha);
    if (!lsgd) values->grad_omega = Eigen::VectorXd::Zero(n);
    for (long kk = 0; kk < k; ++kk) {
      if (dual_reval) {
        auto& tp = dual_points[kk];
        auto g = tp.tape->gradient(tp.root, tp.leaves, Dual<1>(dq(kk)));
        for (Eigen::Index i = 0; i < n_alpha; ++i) values->grad_alpha(i) += g[i].t[0];
      } else {
        auto& tp = points[kk];
        auto g = tp.tape->gradient(tp.root, tp.leaves, dq(kk));
        for (Eigen::Index i = 0; i < n_alpha; ++i) values->grad_alpha(i) += g[i];
        if (!lsgd)
          for (int j = 0; j < n; ++j) values->grad_omega(j) += g[n_alpha + j];
      }
    }
  }

  // --- step 4: optimizer update ----------------------------------------------
  const uint64_t n_update = params.alpha_count() + (lsgd ? 0 : static_cast<uint64_t>(n));
  count_adam(n_update);

  cost.detail = scope.stop();
  cost.total = cost.detail.total();
  return cost;
}

std::vector<AdRatioRow> ad_ratio_sweep(const AdSweepConfig& cfg) {
  std::vector<AdRatioRow> rows;
  for (int d : cfg.dims) {
    for (int nv : cfg.n_values) {
      Architecture arch;
      arch.input_dim = d;
      arch.hidden.assign(cfg.depth, cfg.width);
      arch.hidden.push_back(nv);
      MlpParameters p = init_parameters(arch, substream_seed(99, "ad-sweep"));
      std::vector<double> x0(d, 1.0);

      AdRatioRow row;
      row.d = d;
      row.n = nv;
      auto lift_cd = [](double v) { return Cd(v); };
      {
        CountScope s;
        auto bp = bind_params<Cd>(p, lift_cd, false);
        std::vector<Cd> x(x0.begin(), x0.end());
        (void)mlp_hidden_stack<Cd>(bp, x);
        row.net_ops = s.stop().total();
      }
      {
        CountScope s;
        auto lift = [](double v) { return v; };
        if (d == 1) {
          auto bp = bind_params<Dual<1>>(p, lift, false);
          std::vector<Dual<1>> x{Dual<1>::seeded(x0[0], 0)};
          (void)mlp_hidden_stack<Dual<1>>(bp, x);
        } else {
          auto bp = bind_params<Dual<2>>(p, lift, false);
          std::vector<Dual<2>> x{Dual<2>::seeded(x0[0], 0), Dual<2>::seeded(x0[1], 1)};
          (void)mlp_hidden_stack<Dual<2>>(bp, x);
        }
        row.forward_ops = s.stop().total();
      }
      {
        CountScope s;
        DTape tape;
        tape.reserve(3 * p.alpha_count());
        auto lift_c = [&](double v) { return tape.constant(v); };
        auto bp = bind_params<DTape::Var>(p, lift_c, false);
        std::vector<DTape::Var> x;
        for (int c = 0; c < d; ++c) x.push_back(tape.leaf(x0[c]));
        auto u = mlp_hidden_stack<DTape::Var>(bp, x);
        for (int j = 0; j < nv; ++j) (void)tape.gradient(u[j], x);
        row.backward_ops = s.stop().total();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_ad_ratio_csv(const std::string& path, const std::vector<AdRatioRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(10);
  f << "input_dim,output_dim,net_ops,forward_ops,backward_ops,forward_ratio,backward_ratio\n";
  for (const auto& r : rows)
    f << r.d << ',' << r.n << ',' << r.net_ops << ',' << r.forward_ops << ',' << r.backward_ops
      << ',' << r.forward_ratio() << ',' << r.backward_ratio() << '\n';
}

std::vector<OptimizerSweepRow> optimizer_cost_sweep(const OptimizerSweepConfig& cfg) {
  std::vector<OptimizerSweepRow> rows;
  for (int nv : cfg.n_values) {
    Architecture arch;
    arch.input_dim = 1;
    arch.hidden.assign(cfg.depth, cfg.width);
    arch.hidden.push_back(nv);
    MlpParameters p = init_parameters(arch, substream_seed(cfg.seed, "optimizer-sweep"));
    Basis basis = Basis::one_d(cfg.m_factor * nv);
    RandomStream rng(substream_seed(cfg.seed, "optimizer-sweep-batch"));
    Partition part = uniform_partition(cfg.k_factor * nv / 2);
    QuadratureBatch batch = sample_composite(part, rng);

    OptimizerSweepRow row;
    row.n = nv;
    row.baseline =
        counted_iteration(IterationScheme::gd_weak_backward, p, basis, batch, true);
    for (IterationScheme s : {IterationScheme::lsgd_ultraweak,
                              IterationScheme::lsgd_weak_forward,
                              IterationScheme::lsgd_weak_backward})
      row.numerators.push_back(counted_iteration(s, p, basis, batch, true));
    rows.push_back(row);
  }
  return rows;
}

void write_optimizer_csv(const std::string& path, const std::vector<OptimizerSweepRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(10);
  f << "implementation,n,m,k,c_net,vect_net,total,vect_net_over_kcnet,total_over_kcnet,"
       "ratio_vs_gd\n";
  for (const auto& row : rows) {
    auto emit = [&](const IterationCost& c) {
      const double kcnet = double(c.c_net) * double(c.k);
      f << to_string(c.scheme) << ',' << row.n << ',' << c.m << ',' << c.k << ',' << c.c_net
        << ',' << c.vect_net << ',' << c.total << ',' << double(c.vect_net) / kcnet << ','
        << double(c.total) / kcnet << ','
        << double(c.total) / double(row.baseline.total) << '\n';
    };
    emit(row.baseline);
    for (const auto& c : row.numerators) emit(c);
  }
}

}  // namespace vpinn
