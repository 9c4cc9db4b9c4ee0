#include "vpinn/assembly.hpp"

#include <fstream>

#include "vpinn/fast_math.hpp"

namespace vpinn {

namespace {

const double kInvSqrtHalfPi = 1.0 / std::sqrt(kPi / 2.0);

void count_table_build(Eigen::Index k, int modes) {
  count_op(Op::sin, static_cast<uint64_t>(k));
  count_op(Op::cos, static_cast<uint64_t>(k));
  if (modes > 1) {
    count_op(Op::mul, 4ull * k * (modes - 1));
    count_op(Op::add, 2ull * k * (modes - 1));
  }
}

}  // namespace

BasisTables build_tables(const Basis& basis, const QuadratureBatch& q) {
  BasisTables tb;
  tb.dim = basis.dim;
  tb.basis = basis;
  if (basis.dim == 1) {
    Eigen::MatrixXd s, c;
    sine_table(q.axis[0].points, basis.m1, s, c);
    count_table_build(q.axis[0].points.size(), basis.m1);
    tb.v.resize(s.rows(), basis.m1);
    tb.dv.resize(s.rows(), basis.m1);
    tb.lap.resize(s.rows(), basis.m1);
    for (int m = 0; m < basis.m1; ++m) {
      const double nrm = basis.norm(m + 1);
      tb.v.col(m) = s.col(m) / nrm;
      tb.dv.col(m) = c.col(m) * kInvSqrtHalfPi;
      tb.lap.col(m) = s.col(m) * (-(m + 1) * kInvSqrtHalfPi);
    }
    count_op(Op::mul, 3ull * s.rows() * basis.m1);
  } else {
    Eigen::MatrixXd cx, cy;
    sine_table(q.axis[0].points, basis.m1, tb.sx, cx);
    sine_table(q.axis[1].points, basis.m2, tb.sy, cy);
    count_table_build(q.axis[0].points.size(), basis.m1);
    count_table_build(q.axis[1].points.size(), basis.m2);
    tb.cxm.resize(cx.rows(), basis.m1);
    for (int m = 0; m < basis.m1; ++m) tb.cxm.col(m) = cx.col(m) * (m + 1);
    tb.cym.resize(cy.rows(), basis.m2);
    for (int m = 0; m < basis.m2; ++m) tb.cym.col(m) = cy.col(m) * (m + 1);
    count_op(Op::mul, static_cast<uint64_t>(cx.size()) + cy.size());
    tb.inv_norm.resize(basis.m1, basis.m2);
    tb.eig.resize(basis.m1, basis.m2);
    for (int i = 0; i < basis.m1; ++i)
      for (int j = 0; j < basis.m2; ++j) {
        tb.inv_norm(i, j) = 1.0 / basis.norm(i + 1, j + 1);
        tb.eig(i, j) = basis.eigenvalue(i + 1, j + 1);
      }
  }
  return tb;
}

namespace {

using MapKyKx = Eigen::Map<const Eigen::MatrixXd>;

// term(m1,m2) = sum_ij col[(i,j)] ax(i,m1) by(j,m2), with col a flattened
// (x-major, y fastest) weighted sample vector.
Eigen::MatrixXd tensor_contract(const Eigen::VectorXd& col, Eigen::Index kx, Eigen::Index ky,
                                const Eigen::MatrixXd& ax, const Eigen::MatrixXd& by) {
  MapKyKx m(col.data(), ky, kx);
  Eigen::MatrixXd tmp = m.transpose() * by;  // Kx x M2
  count_gemm(kx, ky, by.cols());
  Eigen::MatrixXd out = ax.transpose() * tmp;  // M1 x M2
  count_gemm(ax.cols(), kx, by.cols());
  return out;
}

// w[(i,j)] = sum_{m1,m2} coef(m1,m2) ax(i,m1) by(j,m2), flattened back.
Eigen::VectorXd tensor_expand(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& ax,
                              const Eigen::MatrixXd& by) {
  const Eigen::Index kx = ax.rows(), ky = by.rows();
  Eigen::MatrixXd tmp = by * coef.transpose();  // Ky x M1
  count_gemm(ky, coef.cols(), coef.rows());
  Eigen::MatrixXd w = tmp * ax.transpose();  // Ky x Kx
  count_gemm(ky, coef.rows(), kx);
  return Eigen::Map<const Eigen::VectorXd>(w.data(), kx * ky);
}

Eigen::VectorXd weighted(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  count_op(Op::mul, static_cast<uint64_t>(v.size()));
  return w.cwiseProduct(v);
}

}  // namespace

Eigen::MatrixXd assemble_matrix(const TrialSamples& ts, const BasisTables& tb,
                                const QuadratureBatch& q, Formulation form) {
  const Eigen::Index n = ts.phi.cols();
  const Eigen::Index m = tb.basis.count();
  Eigen::MatrixXd b(m, n);
  if (tb.dim == 1) {
    if (form == Formulation::weak) {
      Eigen::MatrixXd gw = q.weights.asDiagonal() * ts.grad[0];
      count_op(Op::mul, static_cast<uint64_t>(gw.size()));
      b.noalias() = tb.dv.transpose() * gw;
      count_gemm(m, q.size(), n);
    } else {
      Eigen::MatrixXd pw = q.weights.asDiagonal() * ts.phi;
      count_op(Op::mul, static_cast<uint64_t>(pw.size()));
      b.noalias() = -(tb.lap.transpose() * pw);
      count_gemm(m, q.size(), n);
      count_op(Op::add, static_cast<uint64_t>(b.size()));
    }
    return b;
  }
  const Eigen::Index kx = tb.sx.rows(), ky = tb.sy.rows();
  if (form == Formulation::weak) {
    Eigen::MatrixXd gxw = q.weights.asDiagonal() * ts.grad[0];
    Eigen::MatrixXd gyw = q.weights.asDiagonal() * ts.grad[1];
    count_op(Op::mul, static_cast<uint64_t>(gxw.size() + gyw.size()));
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::MatrixXd term = tensor_contract(gxw.col(c), kx, ky, tb.cxm, tb.sy);
      term += tensor_contract(gyw.col(c), kx, ky, tb.sx, tb.cym);
      count_op(Op::add, static_cast<uint64_t>(term.size()));
      term = term.cwiseProduct(tb.inv_norm);
      count_op(Op::mul, static_cast<uint64_t>(term.size()));
      b.col(c) = Eigen::Map<const Eigen::VectorXd>(term.data(), m);
    }
  } else {
    Eigen::MatrixXd pw = q.weights.asDiagonal() * ts.phi;
    count_op(Op::mul, static_cast<uint64_t>(pw.size()));
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::MatrixXd term = tensor_contract(pw.col(c), kx, ky, tb.sx, tb.sy);
      term = term.cwiseProduct(tb.eig).cwiseProduct(tb.inv_norm);
      count_op(Op::mul, 2ull * term.size());
      b.col(c) = Eigen::Map<const Eigen::VectorXd>(term.data(), m);
    }
  }
  return b;
}

Eigen::VectorXd assemble_load(const Eigen::VectorXd& f_vals, const BasisTables& tb,
                              const QuadratureBatch& q) {
  Eigen::VectorXd fw = weighted(q.weights, f_vals);
  if (tb.dim == 1) {
    count_gemm(tb.basis.count(), q.size(), 1);
    return tb.v.transpose() * fw;
  }
  Eigen::MatrixXd term = tensor_contract(fw, tb.sx.rows(), tb.sy.rows(), tb.sx, tb.sy);
  term = term.cwiseProduct(tb.inv_norm);
  count_op(Op::mul, static_cast<uint64_t>(term.size()));
  return Eigen::Map<const Eigen::VectorXd>(term.data(), tb.basis.count());
}

Eigen::VectorXd action_residual(const Eigen::VectorXd& u_vals, const Eigen::MatrixXd& grad_u,
                                const Eigen::VectorXd& l, const BasisTables& tb,
                                const QuadratureBatch& q, Formulation form) {
  const Eigen::Index m = tb.basis.count();
  Eigen::VectorXd r(m);
  if (tb.dim == 1) {
    if (form == Formulation::weak) {
      Eigen::VectorXd gw = weighted(q.weights, grad_u.col(0));
      r.noalias() = tb.dv.transpose() * gw;
      count_gemm(m, q.size(), 1);
    } else {
      Eigen::VectorXd uw = weighted(q.weights, u_vals);
      r.noalias() = -(tb.lap.transpose() * uw);
      count_gemm(m, q.size(), 1);
      count_op(Op::add, static_cast<uint64_t>(m));
    }
  } else {
    const Eigen::Index kx = tb.sx.rows(), ky = tb.sy.rows();
    Eigen::MatrixXd term;
    if (form == Formulation::weak) {
      Eigen::VectorXd gxw = weighted(q.weights, grad_u.col(0));
      Eigen::VectorXd gyw = weighted(q.weights, grad_u.col(1));
      term = tensor_contract(gxw, kx, ky, tb.cxm, tb.sy);
      term += tensor_contract(gyw, kx, ky, tb.sx, tb.cym);
      count_op(Op::add, static_cast<uint64_t>(term.size()));
      term = term.cwiseProduct(tb.inv_norm);
      count_op(Op::mul, static_cast<uint64_t>(term.size()));
    } else {
      Eigen::VectorXd uw = weighted(q.weights, u_vals);
      term = tensor_contract(uw, kx, ky, tb.sx, tb.sy);
      term = term.cwiseProduct(tb.eig).cwiseProduct(tb.inv_norm);
      count_op(Op::mul, 2ull * term.size());
    }
    r = Eigen::Map<const Eigen::VectorXd>(term.data(), m);
  }
  r -= l;
  count_op(Op::add, static_cast<uint64_t>(m));
  return r;
}

void residual_adjoints(const Eigen::VectorXd& r, const BasisTables& tb, const QuadratureBatch& q,
                       Formulation form, Eigen::MatrixXd* w_grad, Eigen::VectorXd* w_val) {
  const Eigen::Index k = q.size();
  if (tb.dim == 1) {
    if (form == Formulation::weak) {
      w_grad->resize(k, 1);
      w_grad->col(0) = 2.0 * q.weights.cwiseProduct(tb.dv * r);
      count_gemm(k, tb.basis.count(), 1);
      count_op(Op::mul, 2ull * k);
    } else {
      *w_val = -2.0 * q.weights.cwiseProduct(tb.lap * r);
      count_gemm(k, tb.basis.count(), 1);
      count_op(Op::mul, 2ull * k);
    }
    return;
  }
  Eigen::Map<const Eigen::MatrixXd> rm(r.data(), tb.basis.m1, tb.basis.m2);
  if (form == Formulation::weak) {
    Eigen::MatrixXd coef = rm.cwiseProduct(tb.inv_norm);
    count_op(Op::mul, static_cast<uint64_t>(coef.size()));
    w_grad->resize(k, 2);
    w_grad->col(0) = 2.0 * q.weights.cwiseProduct(tensor_expand(coef, tb.cxm, tb.sy));
    w_grad->col(1) = 2.0 * q.weights.cwiseProduct(tensor_expand(coef, tb.sx, tb.cym));
    count_op(Op::mul, 4ull * k);
  } else {
    Eigen::MatrixXd coef = rm.cwiseProduct(tb.eig).cwiseProduct(tb.inv_norm);
    count_op(Op::mul, 2ull * coef.size());
    *w_val = 2.0 * q.weights.cwiseProduct(tensor_expand(coef, tb.sx, tb.sy));
    count_op(Op::mul, 2ull * k);
  }
}

namespace {

Eigen::VectorXd sample_source(const std::function<double(const double*)>& source,
                              const QuadratureBatch& q) {
  Eigen::VectorXd f(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    std::array<double, 2> xp{q.points(i, 0), q.dim == 2 ? q.points(i, 1) : 0.0};
    f(i) = source(xp.data());
  }
  return f;
}

}  // namespace

AssembledSystem assemble(const MlpParameters& p, const Basis& basis, const QuadratureBatch& q,
                         Formulation form, const std::function<double(const double*)>& source) {
  BatchedStack stack;
  batched_forward(p, q.points, form == Formulation::weak, stack);
  CutoffBatch cut = cutoff_batch(q.points);
  TrialSamples ts = trial_samples(stack, cut);
  BasisTables tb = build_tables(basis, q);
  AssembledSystem sys;
  sys.b = assemble_matrix(ts, tb, q, form);
  sys.l = assemble_load(sample_source(source, q), tb, q);
  return sys;
}

double loss_via_action(const MlpParameters& p, const Basis& basis, const QuadratureBatch& q,
                       Formulation form, const std::function<double(const double*)>& source) {
  BatchedStack stack;
  batched_forward(p, q.points, form == Formulation::weak, stack);
  CutoffBatch cut = cutoff_batch(q.points);
  TrialSamples ts = trial_samples(stack, cut);
  BasisTables tb = build_tables(basis, q);
  Eigen::VectorXd l = assemble_load(sample_source(source, q), tb, q);

  Eigen::VectorXd u_vals;
  Eigen::MatrixXd grad_u(q.size(), q.dim);
  if (form == Formulation::weak) {
    for (int c = 0; c < q.dim; ++c) {
      grad_u.col(c) = ts.grad[c] * p.omega;
      count_gemm(q.size(), p.omega.size(), 1);
    }
  } else {
    u_vals = ts.phi * p.omega;
    count_gemm(q.size(), p.omega.size(), 1);
  }
  Eigen::VectorXd r = action_residual(u_vals, grad_u, l, tb, q, form);
  count_op(Op::mul, static_cast<uint64_t>(r.size()));
  count_op(Op::add, static_cast<uint64_t>(r.size()) - 1);
  return r.squaredNorm();
}

SpectralReport spectral_report(const MlpParameters& p, const Basis& training_basis,
                               int extension_factor, const QuadratureBatch& q, Formulation form,
                               const std::function<double(const double*)>& source) {
  SpectralReport rep;
  rep.basis = training_basis.extended(extension_factor);
  BasisTables tb = build_tables(rep.basis, q);
  Eigen::VectorXd l = assemble_load(sample_source(source, q), tb, q);

  BatchedStack stack;
  batched_forward(p, q.points, form == Formulation::weak, stack);
  CutoffBatch cut = cutoff_batch(q.points);
  TrialSamples ts = trial_samples(stack, cut);
  Eigen::VectorXd u_vals;
  Eigen::MatrixXd grad_u(q.size(), q.dim);
  if (form == Formulation::weak) {
    for (int c = 0; c < q.dim; ++c) grad_u.col(c) = ts.grad[c] * p.omega;
  } else {
    u_vals = ts.phi * p.omega;
  }
  Eigen::VectorXd coeff = action_residual(u_vals, grad_u, l, tb, q, form);

  // Order modes so the training block comes first; the cumulative sum at M
  // then reproduces the training-loss formula on this batch.
  const int total = rep.basis.count();
  rep.order.resize(total);
  if (rep.basis.dim == 1) {
    for (int i = 0; i < total; ++i) rep.order[i] = i;
  } else {
    std::vector<int> idx(total);
    for (int i = 0; i < total; ++i) idx[i] = i;
    auto level = [&](int flat) {
      auto [i1, i2] = rep.basis.unflatten(flat);
      const int l1 = (i1 + training_basis.m1 - 1) / training_basis.m1;
      const int l2 = (i2 + training_basis.m2 - 1) / training_basis.m2;
      return std::max(l1, l2);
    };
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return level(a) < level(b); });
    rep.order = idx;
  }
  rep.coefficients.resize(total);
  rep.cumulative.resize(total);
  double acc = 0.0;
  for (int i = 0; i < total; ++i) {
    const double cf = coeff(rep.order[i]);
    rep.coefficients(i) = cf;
    acc += cf * cf;
    rep.cumulative(i) = acc;
  }
  return rep;
}

void write_spectrum_csv(const std::string& path, const SpectralReport& initial,
                        const SpectralReport& final_report) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(17);
  f << "row,m1,m2,initial_coefficient,initial_cumulative,final_coefficient,final_cumulative\n";
  for (int i = 0; i < initial.coefficients.size(); ++i) {
    int m1 = initial.order[i] + 1, m2 = 0;
    if (initial.basis.dim == 2) {
      auto [a, b] = initial.basis.unflatten(initial.order[i]);
      m1 = a;
      m2 = b;
    }
    f << i << ',' << m1 << ',' << m2 << ',' << initial.coefficients(i) << ','
      << initial.cumulative(i) << ',' << final_report.coefficients(i) << ','
      << final_report.cumulative(i) << '\n';
  }
}

}  // namespace vpinn
